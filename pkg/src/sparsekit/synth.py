"""Synthetic problem generation and an exhaustive combinatorial oracle.

The generation protocol: dictionary entries are drawn i.i.d. standard normal
and column-normalized; a planted instance selects k distinct columns uniformly
at random and sums them with unit coefficients, so an exact sparse solution
exists by construction.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import BudgetExceeded, KTooLarge
from .linalg import RANK_RCOND, Dictionary, SparseSolution, empty_solution, normalize_columns
from .rng import RngStream

DEFAULT_ORACLE_BUDGET = 2_000_000


@dataclass(eq=False)
class ProblemInstance:
    """A planted sparse-recovery problem: signal = dictionary[support] @ values."""

    dictionary: Dictionary
    true_support: np.ndarray
    true_values: np.ndarray
    signal: np.ndarray
    seed: int

    @property
    def n(self) -> int:
        return self.dictionary.n_rows

    @property
    def m(self) -> int:
        return self.dictionary.n_cols

    @property
    def k(self) -> int:
        return int(self.true_support.size)


def gen_dictionary(n: int, m: int, seed: int) -> Dictionary:
    """Random dictionary: i.i.d. standard-normal entries, columns normalized.

    Entries come from the Philox stream at (seed,), so identical (n, m, seed)
    yields bit-identical output.
    """
    if n < 1 or m < 1:
        raise ValueError("dictionary dimensions must be positive")
    raw = RngStream(seed).generator().standard_normal((n, m))
    return normalize_columns(raw)


def gen_instance(D: Dictionary, k: int, seed: int, signed: bool = False) -> ProblemInstance:
    """Planted instance: k distinct uniform column indices with coefficients 1.

    ``signed=True`` switches to Rademacher (+-1) coefficients; the default
    all-ones form is the benchmark protocol.
    """
    m = D.n_cols
    if k > m:
        raise KTooLarge(f"k={k} exceeds representation size {m}")
    gen = RngStream(seed).generator()
    support = gen.choice(m, size=k, replace=False).astype(np.intp)
    values = np.ones(k)
    if signed:
        values = gen.choice(np.array([-1.0, 1.0]), size=k)
    signal = D.entries[:, support] @ values
    return ProblemInstance(D, support, values, signal, seed)


def exhaustive_oracle(
    D: Dictionary, x: np.ndarray, k: int, budget: int = DEFAULT_ORACLE_BUDGET
) -> SparseSolution:
    """Globally optimal k-sparse support by brute-force enumeration.

    Evaluates the least-squares residual of every k-subset and returns the
    minimizer (ties go to the lexicographically smallest support). Intended
    as ground truth for small instances; raises BudgetExceeded when C(M, k)
    subsets would exceed ``budget``.
    """
    if k == 0:
        return empty_solution(x)
    m = D.n_cols
    if k > m:
        raise KTooLarge(f"k={k} exceeds representation size {m}")
    required = math.comb(m, k)
    if required > budget:
        raise BudgetExceeded(required, budget)

    entries = D.entries
    best_norm = np.inf
    best_support: tuple[int, ...] | None = None
    best_values: np.ndarray | None = None
    count = 0
    for combo in itertools.combinations(range(m), k):
        sub = entries[:, combo]
        # tolerant solve: rank-deficient subsets still have a well-defined
        # minimal residual, which is all the oracle ranks by
        c, _, _, _ = scipy.linalg.lstsq(
            sub, x, cond=RANK_RCOND, lapack_driver="gelsy", check_finite=False
        )
        r = x - sub @ c
        rnorm = math.sqrt(r @ r)
        count += 1
        # strict < keeps the first (lexicographically smallest) minimizer
        if rnorm < best_norm:
            best_norm = rnorm
            best_support = combo
            best_values = c
    return SparseSolution(
        support=np.array(best_support, dtype=np.intp),
        values=best_values,
        residual_norm=best_norm,
        iterations=count,
        bottom_up_transfers=0,
    )


def write_problem(inst: ProblemInstance, path) -> None:
    """Write an instance in the interchange text format.

    Line 1: ``N M K seed``; line 2: 1-based support indices; then N rows of
    M dictionary entries (17 significant digits); then one line of N signal
    entries. The format round-trips float64 values exactly.
    """
    lines = [f"{inst.n} {inst.m} {inst.k} {inst.seed}"]
    lines.append(" ".join(str(int(j) + 1) for j in inst.true_support))
    for row in inst.dictionary.entries:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    lines.append(" ".join(f"{v:.17g}" for v in inst.signal))
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def read_problem(path) -> ProblemInstance:
    """Read an instance written by :func:`write_problem`."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if len(lines) < 2:
        raise ValueError(f"{path}: truncated problem file")
    try:
        n, m, k, seed = (int(tok) for tok in lines[0].split())
        support = np.array([int(tok) - 1 for tok in lines[1].split()], dtype=np.intp)
        if support.size != k:
            raise ValueError(f"expected {k} support indices, found {support.size}")
        if len(lines) < 2 + n + 1:
            raise ValueError("missing dictionary or signal rows")
        entries = np.array(
            [[float(tok) for tok in lines[2 + i].split()] for i in range(n)]
        )
        if entries.shape != (n, m):
            raise ValueError(f"dictionary block has shape {entries.shape}, expected {(n, m)}")
        signal = np.array([float(tok) for tok in lines[2 + n].split()])
        if signal.shape != (n,):
            raise ValueError(f"signal line has {signal.shape[0]} entries, expected {n}")
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    return ProblemInstance(Dictionary(entries), support, np.ones(k), signal, seed)
