"""Exhaustive exact solver for small instances.

Enumerates every task-to-CPU assignment and, for each, minimizes the
weighted cost over the compression fraction exactly: with the allocation
fixed, every per-CPU latency and the device energy are affine in gamma, so
the cost is a maximum of affine functions (convex piecewise-linear) whose
minimum over [0, 1] lies at an endpoint or at an intersection of two
pieces.  Used for verification only; complexity is (M+1)^N.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .model import Assignment, Decision, Instance, objective

__all__ = ["OracleResult", "OracleSizeError", "optimal_gamma_for", "solve_exact"]


class OracleSizeError(ValueError):
    """Raised when an instance is too large to enumerate."""


@dataclass(frozen=True)
class OracleResult:
    decision: Decision
    psi_p1: float
    psi_p3: float
    enumerated: int
    trace: tuple[tuple[tuple[int, ...], float, float], ...] | None = None


@dataclass(frozen=True)
class _Tables:
    """Per-instance endpoint coefficient tables."""

    g0: np.ndarray      # (n,) local seconds
    d: np.ndarray       # (n, m) offloaded seconds at gamma = 0
    e: np.ndarray       # (n, m) offloaded seconds at gamma = 1
    alpha: np.ndarray
    g_ul: np.ndarray    # (n, m) upload seconds of the full input
    g_dl: np.ndarray    # (n, m) download seconds


@lru_cache(maxsize=128)
def _tables(instance: Instance) -> _Tables:
    dev = instance.device
    alpha = np.array([t.alpha for t in instance.tasks])
    beta = np.array([t.beta for t in instance.tasks])
    omega = np.array([t.omega for t in instance.tasks])
    rk = np.array([c.r for c in instance.caps])
    cul = np.array([c.c_ul for c in instance.caps])
    cdl = np.array([c.c_dl for c in instance.caps])
    g_ul = alpha[:, None] / cul[None, :]
    g_dl = beta[:, None] / cdl[None, :]
    comp = omega[:, None] / rk[None, :]
    d = g_ul + comp + g_dl
    e = alpha[:, None] * dev.jc * (1.0 / dev.r0 + 1.0 / rk[None, :]) + comp + g_dl
    return _Tables(g0=omega / dev.r0, d=d, e=e, alpha=alpha, g_ul=g_ul, g_dl=g_dl)


def _endpoint_costs(
    instance: Instance, tab: _Tables, cpu_of: tuple[int, ...]
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """(per-CPU latency at gamma=0, at gamma=1, energy at 0, energy at 1)."""
    m = instance.n_caps
    dev = instance.device
    t0 = np.zeros(m + 1)
    t1 = np.zeros(m + 1)
    e0 = 0.0
    e1 = 0.0
    for i, k in enumerate(cpu_of):
        if k == 0:
            t0[0] += tab.g0[i]
            t1[0] += tab.g0[i]
            e0 += dev.p_comp * tab.g0[i]
            e1 += dev.p_comp * tab.g0[i]
        else:
            t0[k] += tab.d[i, k - 1]
            t1[k] += tab.e[i, k - 1]
            rx = dev.p_rx * tab.g_dl[i, k - 1]
            e0 += dev.p_tx * tab.g_ul[i, k - 1] + rx
            e1 += dev.p_compr * tab.alpha[i] + rx
    return t0, t1, e0, e1


def _gamma_search(
    lambda_t: float, lambda_e: float, t0: np.ndarray, t1: np.ndarray, e0: float, e1: float
) -> tuple[float, float]:
    """Exact minimizer of max_k(lt*T_k(g)) + le*e(g) over g in [0, 1]."""
    base = lambda_t * t0 + lambda_e * e0
    slope = lambda_t * (t1 - t0) + lambda_e * (e1 - e0)
    candidates = [0.0, 1.0]
    n_lines = base.size
    for a in range(n_lines):
        for b in range(a + 1, n_lines):
            ds = slope[a] - slope[b]
            if abs(ds) < 1e-300:
                continue
            g = (base[b] - base[a]) / ds
            if 0.0 < g < 1.0:
                candidates.append(float(g))
    candidates.sort()
    best_g = 0.0
    best_psi = np.inf
    for g in candidates:
        psi = float(np.max(base + slope * g))
        if psi < best_psi:
            best_psi = psi
            best_g = g
    return best_g, best_psi


def optimal_gamma_for(instance: Instance, assignment: Assignment) -> tuple[float, float]:
    """Exact best compression fraction and cost for a fixed assignment.

    When the cost does not depend on gamma (nothing offloaded) the
    convention is gamma = 0.
    """
    tab = _tables(instance)
    t0, t1, e0, e1 = _endpoint_costs(instance, tab, assignment.cpu_of)
    return _gamma_search(instance.lambda_t, instance.lambda_e, t0, t1, e0, e1)


def solve_exact(
    instance: Instance,
    max_assignments: float = 2e6,
    keep_trace: bool = False,
) -> OracleResult:
    """Globally optimal decision by full enumeration.

    Also reports the exact binary optimum of the endpoint-bounded variant,
    where the latency term charges max(T_k(0), T_k(1)) regardless of gamma
    and the energy term is therefore minimized at a gamma endpoint.
    Assignments are enumerated lexicographically; the first minimizer wins
    ties.
    """
    n, m = instance.n_tasks, instance.n_caps
    total = (m + 1) ** n
    if total > max_assignments:
        raise OracleSizeError(
            f"(M+1)^N = {total} assignments exceeds the limit {int(max_assignments)}"
        )
    tab = _tables(instance)
    lt, le = instance.lambda_t, instance.lambda_e

    best_cpu: tuple[int, ...] | None = None
    best_gamma = 0.0
    best_psi = np.inf
    best_p3 = np.inf
    trace: list[tuple[tuple[int, ...], float, float]] = []

    for cpu_of in itertools.product(range(m + 1), repeat=n):
        t0, t1, e0, e1 = _endpoint_costs(instance, tab, cpu_of)
        g, psi = _gamma_search(lt, le, t0, t1, e0, e1)
        if psi < best_psi:
            best_psi = psi
            best_gamma = g
            best_cpu = cpu_of
        p3 = lt * float(np.max(np.maximum(t0, t1))) + le * min(e0, e1)
        if p3 < best_p3:
            best_p3 = p3
        if keep_trace:
            trace.append((cpu_of, g, psi))

    assert best_cpu is not None
    decision = Decision(Assignment(best_cpu), best_gamma)
    # report the cost recomputed by the reference model so downstream
    # comparisons share one evaluation path
    psi_p1 = objective(instance, decision).psi
    return OracleResult(
        decision=decision,
        psi_p1=psi_p1,
        psi_p3=best_p3,
        enumerated=total,
        trace=tuple(trace) if keep_trace else None,
    )
