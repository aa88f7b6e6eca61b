"""Online k-median with outliers under bounded recourse."""
from .errors import (
    BicriteriaInapplicableError,
    DataError,
    DegenerateInputError,
    DuplicatePointError,
    InfeasibleError,
    InvalidSolutionError,
    InvalidSwapError,
    KMedianError,
    OracleTooLargeError,
    PenaltyMonotonicityError,
    UnsupportedModeError,
)
from .ledger import OFFSET, AssignmentLedger, Instance, RecourseLog, Solution, build_ledger
from .local_search import (
    BEST_IMPROVEMENT,
    FIRST_IMPROVEMENT,
    SearchParams,
    SwapCandidate,
    find_efficient_swap,
    is_efficient,
    local_search_to_optimum,
    offline_bicriteria,
    offline_penalty_local_search,
)
from .metric import MetricSpace
from .online import (
    F_EQUALS_C,
    STATIC_F,
    OnlineConfig,
    OnlineState,
    StepReport,
    advance_z,
    current_solution,
    init_state,
    online_insert,
    run_stream,
)
from .bench import ExperimentSpec, StepLogRow, emit_log_csv, estimate_baseline, load_points_csv, run_experiment

__all__ = [name for name in dir() if not name.startswith("_")]
