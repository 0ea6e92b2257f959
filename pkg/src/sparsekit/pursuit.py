"""Greedy pursuit solvers: Matching Pursuit, Orthogonal Matching Pursuit,
and Subspace Pursuit.

All three share the selection rule argmax_j |d_j^T r| and differ in how they
update coefficients and the residual. Solvers accept an optional ``hook``
callable for instrumentation; it receives events

  hook("bottom_up", n=..., m=...)        one full M-column D^T product
  hook("iteration", t=..., support=..., residual=..., residual_norm=...,
       accepted=..., value=...)          end of one iteration

where ``value`` is only present for MP (the projection added that step) and
``accepted`` is False exactly for a Subspace Pursuit step that was reverted.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import KTooLarge
from .linalg import Dictionary, SparseSolution, max_ind, residual, restricted_ls_solve

Hook = Callable[..., None]

# Interpretation of the exact-zero residual test in floating point: relative
# to the signal norm, applied when no explicit tolerance is configured.
DEFAULT_RELATIVE_TOL = 1e-9


@dataclass
class PursuitConfig:
    """Shared solver configuration.

    ``k`` is the target support size; OMP requires k <= N and SP requires
    2k <= N (checked at run time). ``residual_tol`` of None means
    1e-9 * ||x||_2.
    """

    k: int
    max_iters: int = 100
    residual_tol: Optional[float] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.residual_tol is not None and self.residual_tol < 0:
            raise ValueError("residual_tol must be nonnegative")

    def effective_tol(self, x: np.ndarray) -> float:
        if self.residual_tol is not None:
            return self.residual_tol
        return DEFAULT_RELATIVE_TOL * float(np.linalg.norm(x))


def run_mp(D: Dictionary, x: np.ndarray, cfg: PursuitConfig, hook: Hook | None = None) -> SparseSolution:
    """Matching Pursuit: deflate the residual against one column per step.

    A re-selected index accumulates into its existing coefficient, so the
    support can stay below k for many iterations on coherent dictionaries.
    """
    n, m = D.entries.shape
    entries = D.entries
    tol = cfg.effective_tol(x)
    r = x.astype(np.float64, copy=True)
    rnorm = math.sqrt(r @ r)
    coeffs: dict[int, float] = {}
    transfers = 0
    iters = 0
    while iters < cfg.max_iters and rnorm > tol and len(coeffs) < cfg.k:
        e = entries.T @ r
        transfers += n * m
        if hook:
            hook("bottom_up", n=n, m=m)
        b = int(np.argmax(np.abs(e)))  # ties: argmax returns the first = smaller index
        w = float(e[b])
        coeffs[b] = coeffs.get(b, 0.0) + w
        r -= w * entries[:, b]
        rnorm = math.sqrt(r @ r)
        iters += 1
        if hook:
            hook(
                "iteration",
                t=iters,
                support=np.fromiter(coeffs, dtype=np.intp),
                residual=r.copy(),
                residual_norm=rnorm,
                accepted=True,
                value=w,
            )
    support = np.fromiter(coeffs, dtype=np.intp)
    values = np.fromiter(coeffs.values(), dtype=np.float64)
    return SparseSolution(support, values, rnorm, iters, transfers)


def run_omp(D: Dictionary, x: np.ndarray, cfg: PursuitConfig, hook: Hook | None = None) -> SparseSolution:
    """Orthogonal Matching Pursuit: one new index per step, all coefficients
    re-solved so the residual stays orthogonal to the selected columns.
    """
    n, m = D.entries.shape
    if cfg.k > n:
        raise KTooLarge(f"OMP needs k <= N, got k={cfg.k}, N={n}")
    entries = D.entries
    tol = cfg.effective_tol(x)
    r = x.astype(np.float64, copy=True)
    rnorm = math.sqrt(r @ r)
    support: list[int] = []
    values = np.zeros(0)
    transfers = 0
    iters = 0
    while iters < cfg.max_iters and rnorm > tol and len(support) < min(cfg.k, m):
        e = entries.T @ r
        transfers += n * m
        if hook:
            hook("bottom_up", n=n, m=m)
        scores = np.abs(e)
        scores[support] = -1.0  # never re-select an index already in the support
        b = int(np.argmax(scores))
        support.append(b)
        values = restricted_ls_solve(D, np.array(support, dtype=np.intp), x)
        r = x - entries[:, support] @ values
        rnorm = math.sqrt(r @ r)
        iters += 1
        if hook:
            hook(
                "iteration",
                t=iters,
                support=np.array(support, dtype=np.intp),
                residual=r.copy(),
                residual_norm=rnorm,
                accepted=True,
            )
    return SparseSolution(np.array(support, dtype=np.intp), values, rnorm, iters, transfers)


def run_sp(D: Dictionary, x: np.ndarray, cfg: PursuitConfig, hook: Hook | None = None) -> SparseSolution:
    """Subspace Pursuit: expand the candidate set by the k best residual
    correlations, re-solve on the union, prune back to the k largest
    coefficients, and halt on the first non-improving iteration (reverting
    to the previous index set).
    """
    n, m = D.entries.shape
    if 2 * cfg.k > n:
        raise KTooLarge(f"SP needs 2k <= N, got k={cfg.k}, N={n}")
    entries = D.entries
    tol = cfg.effective_tol(x)

    e0 = entries.T @ x
    transfers = n * m
    if hook:
        hook("bottom_up", n=n, m=m)
    support = max_ind(e0, cfg.k)
    r, values = residual(D, support, x)
    rnorm = math.sqrt(r @ r)
    if hook:
        hook(
            "iteration",
            t=0,
            support=support.copy(),
            residual=r.copy(),
            residual_norm=rnorm,
            accepted=True,
        )
    iters = 0
    if rnorm <= tol:
        return SparseSolution(support, values, rnorm, iters, transfers)

    for t in range(1, cfg.max_iters + 1):
        e = entries.T @ r
        transfers += n * m
        if hook:
            hook("bottom_up", n=n, m=m)
        expansion = max_ind(e, cfg.k)
        in_support = np.isin(expansion, support)
        union = np.concatenate([support, expansion[~in_support]])
        coeffs = restricted_ls_solve(D, union, x)
        new_support = union[max_ind(coeffs, cfg.k)]
        new_r, new_values = residual(D, new_support, x)
        new_rnorm = math.sqrt(new_r @ new_r)
        iters = t
        if new_rnorm <= tol:
            if hook:
                hook(
                    "iteration",
                    t=t,
                    support=new_support.copy(),
                    residual=new_r.copy(),
                    residual_norm=new_rnorm,
                    accepted=True,
                )
            return SparseSolution(new_support, new_values, new_rnorm, iters, transfers)
        if new_rnorm >= rnorm:
            # no improvement: keep the previous index set and stop
            if hook:
                hook(
                    "iteration",
                    t=t,
                    support=new_support.copy(),
                    residual=new_r.copy(),
                    residual_norm=new_rnorm,
                    accepted=False,
                )
            return SparseSolution(support, values, rnorm, iters, transfers)
        support, values, r, rnorm = new_support, new_values, new_r, new_rnorm
        if hook:
            hook(
                "iteration",
                t=t,
                support=support.copy(),
                residual=r.copy(),
                residual_norm=rnorm,
                accepted=True,
            )
    return SparseSolution(support, values, rnorm, iters, transfers)
