"""Equal-sum partition toolkit: exact solvers, certificates and searches
for partitioning {1..n} into k prescribed-size equal-sum subsets."""

from .core import (
    Composition,
    EqualSumPartition,
    EsppError,
    EsppInstance,
    IncompleteInstance,
    Rational,
    complete_incomplete,
    slack_alphas,
    slack_at,
    target_sum,
    validate_espp,
    validate_incomplete,
    verify_partition,
)
from .criteria import CriterionReport, certify_unsolvable, criterion1, criterion3, max_sum
from .families import FamilyParams, certify_member, choose_d, corner_point, emit_instance, find_uv, k_progression, region_grid
from .fluid import (
    FluidProblem,
    TransferPlan,
    frac_slack,
    frac_slack_at,
    from_espp,
    is_robust,
    solve,
    solve_with_trace,
    structure,
    verify_plan,
)
from .oracle import BruteResult, brute_solve, exhaustive_solvability_table
from .rounding import LinearFamily, RoundingRun, admissible_n, pair_counts, solve_linear
from .scanner import ScanResult, scan, scan_checkpointed

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
