"""Recovery of a feasible decision from the solved relaxation.

When the relaxed matrix is numerically rank one its leading eigenvector is
the lifted decision and can be read off directly.  Otherwise candidates
are drawn from a zero-mean Gaussian whose covariance is the allocation
block of the relaxed matrix, each sample is rounded row-wise to a one-hot
allocation, the compression fraction is read from the border column, and
the candidate with the smallest true cost wins.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import oracle as oracle_mod
from .linalg import factor_sqrt, psd_project
from .model import Assignment, CostBreakdown, Decision, Instance, objective
from .qcqp import YLayout, build
from .sdp import SdpSolverError, homogenize, rank_one_check, solve, to_standard_form

__all__ = [
    "RoundingOptions",
    "RoundingReport",
    "extract_gamma",
    "sample_candidates",
    "round_candidate",
    "decode_rank_one",
    "select_best",
    "round_from_relaxation",
    "run_algorithm1",
]


@dataclass(frozen=True)
class RoundingOptions:
    """Knobs of the randomized recovery.

    ``include_column_candidate`` adds one deterministic candidate rounded
    from the border column of the relaxed matrix; it goes beyond the plain
    randomized scheme and can be switched off for strict replication.
    ``refine_gamma`` re-optimizes the compression fraction exactly per
    candidate instead of sharing the extracted one.
    """

    l: int = 100
    seed: int = 0
    refine_gamma: bool = False
    include_column_candidate: bool = True

    def __post_init__(self) -> None:
        if self.l < 1:
            raise ValueError(f"sample count must be >= 1, got {self.l}")


@dataclass(frozen=True)
class RoundingReport:
    """Best recovered decision plus diagnostics of the search."""

    decision: Decision
    psi: float
    gamma: float
    breakdown: CostBreakdown
    sdr_lower_bound: float
    rank1: bool
    candidates_evaluated: int
    psi_min: float
    psi_median: float
    psi_max: float
    column_candidate_included: bool
    refine_gamma_used: bool
    solver_status: str = ""
    solver_iterations: int = 0


def extract_gamma(zstar: np.ndarray, layout: YLayout) -> float:
    """Compression fraction read from the border column, clamped to [0, 1]."""
    g = float(zstar[layout.gamma_index, layout.hom_index])
    return min(1.0, max(0.0, g))


def sample_candidates(
    zstar: np.ndarray,
    layout: YLayout,
    options: RoundingOptions,
    seed: int | None = None,
) -> np.ndarray:
    """Draw L allocation-space samples, shape (L, q).

    The covariance is the PSD projection of the upper-left allocation block
    of the relaxed matrix.  Each sample uses its own child generator keyed
    by (seed, sample index), so a longer run extends a shorter one with the
    same seed and per-sample work can be parallelized without changing the
    result.
    """
    q = layout.q
    zprime = np.asarray(zstar, dtype=float)[:q, :q]
    factor = factor_sqrt(psd_project(0.5 * (zprime + zprime.T)))
    children = np.random.SeedSequence(options.seed if seed is None else seed).spawn(options.l)
    out = np.empty((options.l, q))
    for idx, child in enumerate(children):
        rng = np.random.default_rng(child)
        out[idx] = factor @ rng.standard_normal(q)
    return out


def round_candidate(xhat: np.ndarray, layout: YLayout) -> Assignment:
    """Round a length-q sample to a one-hot allocation, row-wise argmax.

    Ties go to the lowest CPU index.
    """
    x = layout.x_matrix(np.asarray(xhat, dtype=float))
    return Assignment(tuple(int(k) for k in np.argmax(x, axis=1)))


def decode_rank_one(zstar: np.ndarray, layout: YLayout) -> Decision:
    """Decision read from the leading eigenvector of a rank-one matrix."""
    _, lam, vec = rank_one_check(np.asarray(zstar, dtype=float), ratio_tol=np.inf)
    y = vec * np.sqrt(max(lam, 0.0))
    if y[layout.hom_index] < 0:
        y = -y
    scale = y[layout.hom_index]
    if abs(scale) > 1e-12:
        y = y / scale
    assignment = round_candidate(y[: layout.q], layout)
    gamma = min(1.0, max(0.0, float(y[layout.gamma_index])))
    return Decision(assignment, gamma)


def select_best(
    instance: Instance,
    candidates: list[Assignment],
    gamma: float,
    options: RoundingOptions,
) -> RoundingReport:
    """Evaluate candidates with the true cost and keep the cheapest.

    Duplicate assignments are evaluated once; the first occurrence wins
    ties, so the result is deterministic for a fixed candidate order.
    """
    if not candidates:
        raise ValueError("need at least one candidate")
    seen: set[tuple[int, ...]] = set()
    best_bd: CostBreakdown | None = None
    best_decision: Decision | None = None
    psis: list[float] = []
    for cand in candidates:
        key = cand.cpu_of
        if key in seen:
            continue
        seen.add(key)
        decision = Decision(cand, gamma)
        bd = objective(instance, decision)
        if options.refine_gamma:
            g2, psi2 = oracle_mod.optimal_gamma_for(instance, cand)
            if psi2 < bd.psi:
                decision = Decision(cand, g2)
                bd = objective(instance, decision)
        psis.append(bd.psi)
        if best_bd is None or bd.psi < best_bd.psi:
            best_bd = bd
            best_decision = decision
    assert best_bd is not None and best_decision is not None
    arr = np.array(psis)
    return RoundingReport(
        decision=best_decision,
        psi=best_bd.psi,
        gamma=best_decision.gamma,
        breakdown=best_bd,
        sdr_lower_bound=float("nan"),
        rank1=False,
        candidates_evaluated=len(psis),
        psi_min=float(arr.min()),
        psi_median=float(np.median(arr)),
        psi_max=float(arr.max()),
        column_candidate_included=options.include_column_candidate,
        refine_gamma_used=options.refine_gamma,
    )


def round_from_relaxation(
    instance: Instance,
    zstar: np.ndarray,
    options: RoundingOptions,
    *,
    gamma_override: float | None = None,
    rank1_ratio_tol: float = 1e-6,
) -> RoundingReport:
    """Recover a decision from a solved (or planted) relaxation matrix."""
    layout = YLayout(instance.n_tasks, instance.n_caps)
    zstar = np.asarray(zstar, dtype=float)
    is_rank1, _, _ = rank_one_check(0.5 * (zstar + zstar.T), ratio_tol=rank1_ratio_tol)
    if is_rank1:
        decision = decode_rank_one(zstar, layout)
        if gamma_override is not None:
            decision = Decision(decision.assignment, gamma_override)
        bd = objective(instance, decision)
        return RoundingReport(
            decision=decision,
            psi=bd.psi,
            gamma=decision.gamma,
            breakdown=bd,
            sdr_lower_bound=float("nan"),
            rank1=True,
            candidates_evaluated=1,
            psi_min=bd.psi,
            psi_median=bd.psi,
            psi_max=bd.psi,
            column_candidate_included=options.include_column_candidate,
            refine_gamma_used=options.refine_gamma,
        )
    gamma = extract_gamma(zstar, layout) if gamma_override is None else gamma_override
    samples = sample_candidates(zstar, layout, options)
    candidates = [round_candidate(samples[idx], layout) for idx in range(samples.shape[0])]
    if options.include_column_candidate:
        candidates.append(round_candidate(zstar[: layout.q, layout.hom_index], layout))
    return select_best(instance, candidates, gamma, options)


def run_algorithm1(
    instance: Instance,
    options: RoundingOptions = RoundingOptions(),
    *,
    solver_tol: float = 1e-7,
    solver_max_iter: int = 100,
    pin_gamma_zero: bool = False,
) -> RoundingReport:
    """Full pipeline: assemble, relax, solve, and round.

    ``pin_gamma_zero`` runs the no-compression variant: the relaxation gets
    the extra equality that zeroes the compression slot and every candidate
    is evaluated at gamma = 0 exactly.
    """
    form = build(instance)
    hp = homogenize(form)
    problem = to_standard_form(hp, pin_gamma_zero=pin_gamma_zero, bound_t_diag=True)
    sol = solve(problem, tol=solver_tol, max_iter=solver_max_iter)
    if not np.all(np.isfinite(sol.z)):
        raise SdpSolverError(f"solver returned a non-finite iterate (status {sol.status})")
    opts = replace(options, refine_gamma=False) if pin_gamma_zero else options
    report = round_from_relaxation(
        instance,
        sol.z,
        opts,
        gamma_override=0.0 if pin_gamma_zero else None,
    )
    return replace(
        report,
        sdr_lower_bound=sol.objective,
        solver_status=sol.status,
        solver_iterations=sol.iterations,
    )
