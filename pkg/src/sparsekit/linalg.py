"""Dense linear-algebra kernel: dictionaries, ordered index selection,
restricted least-squares solves, and residuals.

Index sets are numpy integer arrays with 0-based indices; order is
significant (it is the selection order). File formats and the CLI translate
to 1-based indices at the boundary.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .errors import KTooLarge, RankDeficient, ZeroColumn

# Relative rank-detection tolerance for restricted solves, scaled by the
# largest singular/diagonal magnitude of the restricted matrix.
RANK_RCOND = 1e-10

# Columns below this norm count as zero and cannot be normalized.
ZERO_COLUMN_TOL = 1e-12

# Unit-norm validation tolerance for dictionary columns.
UNIT_NORM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Dictionary:
    """An N x M matrix whose columns are unit-norm basis vectors.

    M >= N (overcomplete) and M < N are both accepted; the only structural
    requirement is that every column has Euclidean norm 1 within 1e-9.
    """

    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", entries)
        if entries.ndim != 2:
            raise ValueError("dictionary entries must be a 2-d matrix")
        norms = np.sqrt(np.einsum("ij,ij->j", entries, entries))
        if not np.all(np.abs(norms - 1.0) <= UNIT_NORM_TOL):
            bad = int(np.argmax(np.abs(norms - 1.0)))
            raise ValueError(
                f"column {bad} has norm {norms[bad]!r}; columns must be unit norm "
                "(use normalize_columns to build a Dictionary from a raw matrix)"
            )

    @property
    def n_rows(self) -> int:
        return self.entries.shape[0]

    @property
    def n_cols(self) -> int:
        return self.entries.shape[1]

    def restrict(self, support: np.ndarray) -> np.ndarray:
        """Columns selected by ``support``, in support order."""
        return self.entries[:, support]


@dataclass
class SparseSolution:
    """Result of a sparse solver run.

    ``support`` and ``values`` are aligned; ``support`` preserves the order in
    which indices were selected. ``bottom_up_transfers`` counts the scalar
    multiplications spent in full M-column transposed-dictionary products
    (N*M per application), the cost proxy used by the benchmark harness.
    """

    support: np.ndarray
    values: np.ndarray
    residual_norm: float
    iterations: int
    bottom_up_transfers: int


def empty_solution(x: np.ndarray, iterations: int = 0, bottom_up_transfers: int = 0) -> SparseSolution:
    """The trivial all-zero solution (support empty, residual is x itself)."""
    return SparseSolution(
        support=np.zeros(0, dtype=np.intp),
        values=np.zeros(0),
        residual_norm=float(np.linalg.norm(x)),
        iterations=iterations,
        bottom_up_transfers=bottom_up_transfers,
    )


def normalize_columns(matrix: np.ndarray) -> Dictionary:
    """Scale every column of ``matrix`` to unit Euclidean norm.

    Raises ZeroColumn if any column's norm is below 1e-12.
    """
    matrix = np.asarray(matrix, dtype=np.float64)
    norms = np.sqrt(np.einsum("ij,ij->j", matrix, matrix))
    small = norms < ZERO_COLUMN_TOL
    if np.any(small):
        raise ZeroColumn(int(np.argmax(small)))
    return Dictionary(matrix / norms)


def max_ind(v: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest-magnitude components of v, in decreasing
    |v| order; ties are broken toward the smaller index.
    """
    v = np.asarray(v)
    if k < 0:
        raise ValueError("k must be nonnegative")
    if k > v.shape[0]:
        raise KTooLarge(f"k={k} exceeds vector length {v.shape[0]}")
    # stable sort on -|v| keeps the smaller index first among ties
    order = np.argsort(-np.abs(v), kind="stable")
    return order[:k]


def restricted_ls_solve(D: Dictionary, support: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Least-squares coefficients of x against the selected columns.

    Solved by an orthogonalization-based routine (QR with column pivoting),
    not by the explicit normal-equations pseudoinverse. Raises RankDeficient
    when the restricted matrix's effective rank at the working tolerance is
    below the support size (this also covers supports larger than N).
    """
    support = np.asarray(support, dtype=np.intp)
    if support.size == 0:
        return np.zeros(0)
    sub = D.entries[:, support]
    c, _, rank, _ = scipy.linalg.lstsq(
        sub, x, cond=RANK_RCOND, lapack_driver="gelsy", check_finite=False
    )
    if rank < support.size:
        raise RankDeficient(
            f"restricted matrix has rank {rank} < {support.size} selected columns"
        )
    return c


def residual(D: Dictionary, support: np.ndarray, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Residual of x after least-squares projection onto the selected columns.

    Returns ``(x - D[support] @ c, c)``.
    """
    support = np.asarray(support, dtype=np.intp)
    c = restricted_ls_solve(D, support, x)
    if support.size == 0:
        return x.copy(), c
    return x - D.entries[:, support] @ c, c
