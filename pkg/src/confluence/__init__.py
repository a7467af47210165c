"""Confluence search: locating t with Re zeta(1+it) < 0 via simultaneous
prime-phase confluences, gap-table prediction, and high-precision zeta
evaluation."""

from .confsearch import (
    DriftStats,
    ExhaustionPolicy,
    GapTable,
    OrderResult,
    RunConfig,
    RunResult,
    build_gap_table,
    drift_stats,
    next_order_search,
    run,
)
from .errors import (
    ConfluenceError,
    DomainError,
    EvaluationCeilingError,
    GapTableExhausted,
    LockError,
    PoleProximityError,
    PrecisionError,
    TableFormatError,
)
from .modspace import (
    BaseSetParams,
    ConfluencePoint,
    base_set,
    brute_force_base,
    fast_path_threshold,
    lattice_step_residue,
    line_family,
    n_max_for_q,
    nearest_neighbors,
    portrait,
    r_line_zero,
    zero_index_near,
    zero_spacing,
)
from .precision import BigReal, ComplexValue, ExactT, k_unit, log_prime, residue, to_real
from .scanner import NegativeRegionHit, WindowScan, brute_scan, scan_tables, scan_window
from .tables import DirectoryLock, PointTableFile, load_table, save_table
from .titchmarsh import DiskBound, can_be_negative, disk_bound, negativity_threshold
from .zetaeval import (
    DEFAULT_CEILING,
    EvalRequest,
    arg_buildup,
    crossing_index,
    euler_log_partial,
    zeta,
)

__version__ = "0.1.0"

__all__ = [
    "BaseSetParams",
    "BigReal",
    "ComplexValue",
    "ConfluenceError",
    "ConfluencePoint",
    "DEFAULT_CEILING",
    "DirectoryLock",
    "DiskBound",
    "DomainError",
    "DriftStats",
    "EvalRequest",
    "EvaluationCeilingError",
    "ExactT",
    "ExhaustionPolicy",
    "GapTable",
    "GapTableExhausted",
    "LockError",
    "NegativeRegionHit",
    "OrderResult",
    "PointTableFile",
    "PoleProximityError",
    "PrecisionError",
    "RunConfig",
    "RunResult",
    "TableFormatError",
    "WindowScan",
    "arg_buildup",
    "base_set",
    "brute_force_base",
    "brute_scan",
    "build_gap_table",
    "can_be_negative",
    "crossing_index",
    "disk_bound",
    "drift_stats",
    "euler_log_partial",
    "fast_path_threshold",
    "k_unit",
    "lattice_step_residue",
    "line_family",
    "load_table",
    "log_prime",
    "n_max_for_q",
    "nearest_neighbors",
    "negativity_threshold",
    "next_order_search",
    "portrait",
    "r_line_zero",
    "residue",
    "run",
    "save_table",
    "scan_tables",
    "scan_window",
    "to_real",
    "zero_index_near",
    "zero_spacing",
    "zeta",
    "__version__",
]
