"""Joint task-allocation and data-compression optimizer for offloading a
batch of tasks from one mobile device to multiple edge access points.

The pipeline lifts the binary allocation problem to a semidefinite
relaxation, solves it with a dense interior-point method, and recovers a
feasible decision by Gaussian randomized rounding; an exhaustive oracle
verifies solutions on small instances.
"""

from .model import (
    Assignment,
    Cap,
    CostBreakdown,
    Decision,
    Device,
    Instance,
    Task,
    batch_latency,
    energy,
    g_coeff,
    objective,
)
from .oracle import OracleResult, OracleSizeError, optimal_gamma_for, solve_exact
from .qcqp import QcqpForm, YLayout, build, check_feasible, eval_objective, lift_decision
from .rounding import RoundingOptions, RoundingReport, run_algorithm1
from .sdp import (
    SdpProblem,
    SdpSolution,
    SdpSolverError,
    homogenize,
    rank_one_check,
    solve,
    to_standard_form,
)
from .harness import (
    ExperimentConfig,
    RATE_RANGES,
    ScenarioTemplate,
    aggregate,
    default_instance_template,
    run_benchmark,
    sample_realization,
)

__version__ = "0.1.0"

__all__ = [
    "Assignment",
    "Cap",
    "CostBreakdown",
    "Decision",
    "Device",
    "ExperimentConfig",
    "Instance",
    "OracleResult",
    "OracleSizeError",
    "QcqpForm",
    "RATE_RANGES",
    "RoundingOptions",
    "RoundingReport",
    "ScenarioTemplate",
    "SdpProblem",
    "SdpSolution",
    "SdpSolverError",
    "Task",
    "YLayout",
    "aggregate",
    "batch_latency",
    "build",
    "check_feasible",
    "default_instance_template",
    "energy",
    "eval_objective",
    "g_coeff",
    "homogenize",
    "lift_decision",
    "objective",
    "optimal_gamma_for",
    "rank_one_check",
    "run_algorithm1",
    "run_benchmark",
    "sample_realization",
    "solve",
    "solve_exact",
    "to_standard_form",
]
