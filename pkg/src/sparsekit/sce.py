"""Subspace cross-entropy: CE inner loops wrapped in a residual-driven
correction of the Bernoulli parameters.

After each inner CE run, the best support's residual is projected back
through the dictionary (the single costly full transposed product per outer
iteration) and converted into rank-based exponential weights that boost the
probability of columns aligned with what is still unexplained. The corrected
parameter vector is renormalized to sum to k, so the expected mask size stays
near k without ever being hard-constrained to it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .ce import CEConfig, _ce_loop, _finalize_solution
from .errors import KTooLarge, RankDeficient
from .linalg import Dictionary, SparseSolution, empty_solution, max_ind, restricted_ls_solve
from .pursuit import Hook
from .rng import RngStream


@dataclass
class SCEConfig:
    """Outer-loop parameters plus the embedded CE configuration.

    ``inner=None`` installs the reference inner loop for this method:
    population 100, elite_ratio 0.05, step_size 0.9, max_iters 6, stop_eps
    0.1/k. ``k`` is the soft sparsity target used for the correction's
    normalization; returned supports may have a different size.
    """

    k: int
    outer_iters: int = 20
    inner: Optional[CEConfig] = None

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be a positive integer")
        if self.outer_iters < 1:
            raise ValueError("outer_iters must be >= 1")
        if self.inner is None:
            self.inner = CEConfig(
                k=self.k, population=100, elite_ratio=0.05, step_size=0.9, max_iters=6
            )


def rank_weights(e: np.ndarray, k: int) -> np.ndarray:
    """Exponential weights by magnitude rank: the component of e with the
    r-th largest |value| gets exp(-r/k), r = 1..M.

    The weight vector sums to roughly k for large M, so it plays the role of
    an auxiliary Bernoulli parameter vector with about k expected ones.
    """
    m = e.shape[0]
    order = max_ind(e, m)
    q = np.empty(m)
    q[order] = np.exp(-np.arange(1, m + 1) / k)
    return q


def sp_correction(p: np.ndarray, r: np.ndarray, D: Dictionary, k: int) -> np.ndarray:
    """Residual-driven update of Bernoulli parameters.

    Computes e = D^T r, boosts p by ||r||_2 times the rank weights of e,
    renormalizes the sum to k, and clamps into [0, 1]. With r = 0 this
    reduces to renormalizing p itself.
    """
    e = D.entries.T @ r
    q = rank_weights(e, k)
    boosted = p + math.sqrt(r @ r) * q
    total = boosted.sum()
    if total == 0.0:  # only possible when p = 0 and r = 0
        return p.copy()
    return np.clip(k * boosted / total, 0.0, 1.0)


def run_sce(
    D: Dictionary,
    x: np.ndarray,
    cfg: SCEConfig,
    stream: RngStream,
    hook: Hook | None = None,
) -> SparseSolution:
    """Subspace cross-entropy search.

    Each outer iteration runs the inner CE loop (warm-started from the
    current parameters), takes the support of its best sample, and computes
    that support's exact residual. The loop returns early when the residual
    reaches the inner stop_eps, or halts at the first non-improving outer
    iteration, returning the previous (best) support. Like run_ce, the
    returned support keeps only active components (nonzero coefficients).
    """
    n, m = D.entries.shape
    if cfg.k > n:
        raise KTooLarge(f"SCE needs k <= N, got k={cfg.k}, N={n}")
    inner = cfg.inner
    p = inner.initial_params(m)
    eps = inner.effective_eps(x)
    xnorm = float(np.linalg.norm(x))

    best: tuple[np.ndarray, np.ndarray, float] | None = None
    prev_rnorm = np.inf
    transfers = 0
    iters = 0
    for t in range(1, cfg.outer_iters + 1):
        mask, _, _, p, _ = _ce_loop(D, x, p, inner, stream.child(t))
        support = np.flatnonzero(mask).astype(np.intp)
        try:
            values = restricted_ls_solve(D, support, x)
            r = x - D.entries[:, support] @ values if support.size else x
            rnorm = math.sqrt(r @ r)
        except RankDeficient:
            values, r, rnorm = None, None, np.inf
        iters = t
        if hook:
            hook(
                "iteration",
                t=t,
                support=support.copy(),
                residual_norm=rnorm,
                accepted=bool(rnorm < prev_rnorm),
            )
        if rnorm <= eps:
            best = (support, values, rnorm)
            break
        if rnorm >= prev_rnorm:
            break  # no improvement: previous index set stands
        best = (support, values, rnorm)
        p = sp_correction(p, r, D, cfg.k)
        transfers += n * m
        if hook:
            hook("bottom_up", n=n, m=m)
        prev_rnorm = rnorm

    if best is None:
        return empty_solution(x, iterations=iters, bottom_up_transfers=transfers)
    support, values, _ = best
    return _finalize_solution(D, x, support, values, iters, transfers)
