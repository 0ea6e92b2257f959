"""sparsekit: sparse recovery via greedy pursuits and cross-entropy search.

Solvers operate on column-normalized dictionaries and return a
:class:`SparseSolution` carrying the support, coefficients, residual norm,
iteration count, and a bottom-up transfer counter used for cost accounting.
"""

from .ce import CEConfig, draw_samples, elite_update, run_ce, sparse_objective
from .errors import (
    BudgetExceeded,
    EmptyGroup,
    KTooLarge,
    RankDeficient,
    SparsekitError,
    ZeroColumn,
)
from .linalg import (
    Dictionary,
    SparseSolution,
    empty_solution,
    max_ind,
    normalize_columns,
    residual,
    restricted_ls_solve,
)
from .pursuit import PursuitConfig, run_mp, run_omp, run_sp
from .rng import RngStream
from .sce import SCEConfig, rank_weights, run_sce, sp_correction
from .synth import (
    ProblemInstance,
    exhaustive_oracle,
    gen_dictionary,
    gen_instance,
    read_problem,
    write_problem,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceeded",
    "CEConfig",
    "Dictionary",
    "EmptyGroup",
    "KTooLarge",
    "ProblemInstance",
    "PursuitConfig",
    "RankDeficient",
    "RngStream",
    "SCEConfig",
    "SparseSolution",
    "SparsekitError",
    "ZeroColumn",
    "draw_samples",
    "elite_update",
    "empty_solution",
    "exhaustive_oracle",
    "gen_dictionary",
    "gen_instance",
    "max_ind",
    "normalize_columns",
    "rank_weights",
    "read_problem",
    "residual",
    "restricted_ls_solve",
    "run_ce",
    "run_mp",
    "run_omp",
    "run_sce",
    "run_sp",
    "sp_correction",
    "sparse_objective",
    "write_problem",
]
