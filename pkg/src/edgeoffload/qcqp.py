"""Vectorized quadratic form of the offloading problem.

The decision is flattened into y = [x, gamma, t]: the allocation matrix is
stacked column-by-column (all local slots first, then one block of N slots
per access point), followed by the compression fraction and the latency
epigraph variable t.  The weighted cost becomes a quadratic form plus a
linear term, the batch-latency bounds become linear constraints evaluated
at the gamma = 0 and gamma = 1 endpoints, and the binary/interval
conditions become quadratic equalities/inequalities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import Assignment, Decision, Instance, batch_latency

__all__ = ["YLayout", "QcqpForm", "build", "eval_objective", "check_feasible", "lift_decision"]


@dataclass(frozen=True)
class YLayout:
    """Index map for the flattened decision vector.

    Slot k*n + i holds the indicator of task i on CPU k; slot q = n*m + n
    holds gamma and slot q + 1 holds t.  ``hom_index`` is the extra
    homogenization slot used once the vector is lifted to a rank-one matrix.
    """

    n: int
    m: int

    def __post_init__(self) -> None:
        if self.n < 1 or self.m < 1:
            raise ValueError(f"layout needs n >= 1 and m >= 1, got n={self.n}, m={self.m}")

    @property
    def q(self) -> int:
        return self.n * self.m + self.n

    @property
    def gamma_index(self) -> int:
        return self.q

    @property
    def t_index(self) -> int:
        return self.q + 1

    @property
    def length(self) -> int:
        return self.q + 2

    @property
    def hom_index(self) -> int:
        return self.q + 2

    @property
    def lifted_order(self) -> int:
        return self.q + 3

    def index(self, i: int, k: int) -> int:
        """Slot of the indicator of task i on CPU k."""
        if not 0 <= i < self.n:
            raise IndexError(f"task index {i} out of range [0, {self.n})")
        if not 0 <= k <= self.m:
            raise IndexError(f"cpu index {k} out of range [0, {self.m}]")
        return k * self.n + i

    def x_vector(self, assignment: Assignment) -> np.ndarray:
        """One-hot allocation stacked per the layout (length q)."""
        x = np.zeros(self.q)
        for i, k in enumerate(assignment.cpu_of):
            x[self.index(i, k)] = 1.0
        return x

    def x_matrix(self, x: np.ndarray) -> np.ndarray:
        """Reshape a length-q slot vector into an (n, m+1) allocation matrix."""
        x = np.asarray(x, dtype=float)
        if x.shape != (self.q,):
            raise ValueError(f"expected vector of length {self.q}, got shape {x.shape}")
        return x.reshape(self.m + 1, self.n).T


@dataclass(frozen=True)
class QcqpForm:
    """Assembled matrices of the quadratic program.

    a1/a2 couple offloaded allocation slots with gamma (raw, without the
    energy-weight multipliers); b0 is the linear cost; a3/a4 are the
    endpoint latency constraint rows (gamma = 0 and gamma = 1); a5 encodes
    the one-CPU-per-task row sums; d/e_mat are the per-task per-cap endpoint
    latency coefficients and g0 the local ones.
    """

    layout: YLayout
    a1: np.ndarray
    a2: np.ndarray
    b0: np.ndarray
    a3: np.ndarray
    a4: np.ndarray
    a5: np.ndarray
    d: np.ndarray
    e_mat: np.ndarray
    g0: np.ndarray
    lambda_t: float
    lambda_e: float
    p_compr: float
    p_tx: float

    @property
    def a6(self) -> np.ndarray:
        """Quadratic cost matrix with the energy weights applied."""
        return self.lambda_e * self.p_compr * self.a1 - self.lambda_e * self.p_tx * self.a2


def build(instance: Instance) -> QcqpForm:
    """Assemble the quadratic form for one instance."""
    n, m = instance.n_tasks, instance.n_caps
    lay = YLayout(n, m)
    q = lay.q
    dev = instance.device

    alpha = np.array([t.alpha for t in instance.tasks])
    beta = np.array([t.beta for t in instance.tasks])
    omega = np.array([t.omega for t in instance.tasks])
    rk = np.array([c.r for c in instance.caps])
    cul = np.array([c.c_ul for c in instance.caps])
    cdl = np.array([c.c_dl for c in instance.caps])

    g_ul = alpha[:, None] / cul[None, :]  # (n, m)
    g_dl = beta[:, None] / cdl[None, :]
    g0 = omega / dev.r0
    d = g_ul + omega[:, None] / rk[None, :] + g_dl
    e_mat = alpha[:, None] * dev.jc * (1.0 / dev.r0 + 1.0 / rk[None, :]) + omega[:, None] / rk[None, :] + g_dl

    # column-major stacking of the offloaded slots: slot n + (k-1)*n + i
    alpha_stacked = np.tile(alpha, m)
    gul_stacked = g_ul.ravel(order="F")
    gdl_stacked = g_dl.ravel(order="F")

    a1 = np.zeros((q + 2, q + 2))
    a1[n : q, lay.gamma_index] = alpha_stacked / 2.0
    a1[lay.gamma_index, n : q] = alpha_stacked / 2.0
    a2 = np.zeros((q + 2, q + 2))
    a2[n : q, lay.gamma_index] = gul_stacked / 2.0
    a2[lay.gamma_index, n : q] = gul_stacked / 2.0

    b0 = np.zeros(q + 2)
    b0[:n] = instance.lambda_e * dev.p_comp * g0
    b0[n:q] = instance.lambda_e * (dev.p_tx * gul_stacked + dev.p_rx * gdl_stacked)
    b0[lay.t_index] = instance.lambda_t

    a3 = np.zeros((m + 1, q + 2))
    a3[0, :n] = g0
    a3[0, lay.t_index] = -1.0
    for k in range(1, m + 1):
        a3[k, k * n : (k + 1) * n] = d[:, k - 1]
        a3[k, lay.t_index] = -1.0

    a4 = np.zeros((m, q + 2))
    for k in range(1, m + 1):
        a4[k - 1, k * n : (k + 1) * n] = e_mat[:, k - 1]
        a4[k - 1, lay.t_index] = -1.0

    a5 = np.zeros((n, q + 2))
    for k in range(m + 1):
        a5[:, k * n : (k + 1) * n] = np.eye(n)

    return QcqpForm(
        layout=lay,
        a1=a1,
        a2=a2,
        b0=b0,
        a3=a3,
        a4=a4,
        a5=a5,
        d=d,
        e_mat=e_mat,
        g0=g0,
        lambda_t=instance.lambda_t,
        lambda_e=instance.lambda_e,
        p_compr=dev.p_compr,
        p_tx=dev.p_tx,
    )


def lift_decision(instance: Instance, decision: Decision) -> np.ndarray:
    """The y vector of a decision, with t set to the true batch makespan."""
    lay = YLayout(instance.n_tasks, instance.n_caps)
    y = np.zeros(lay.length)
    y[: lay.q] = lay.x_vector(decision.assignment)
    y[lay.gamma_index] = decision.gamma
    y[lay.t_index] = float(np.max(batch_latency(instance, decision)))
    return y


def eval_objective(form: QcqpForm, y: np.ndarray) -> float:
    """Value of the quadratic cost at y."""
    y = np.asarray(y, dtype=float)
    if y.shape != (form.layout.length,):
        raise ValueError(f"expected y of length {form.layout.length}, got shape {y.shape}")
    return float(y @ form.a6 @ y + form.b0 @ y)


def check_feasible(form: QcqpForm, y: np.ndarray, tol: float = 1e-7) -> list[tuple[str, float]]:
    """Violated constraints at y, as (label, residual) pairs.

    Inequalities report their positive slack violation; equalities report
    the signed residual.  An empty list means y is feasible within tol.
    """
    y = np.asarray(y, dtype=float)
    if y.shape != (form.layout.length,):
        raise ValueError(f"expected y of length {form.layout.length}, got shape {y.shape}")
    lay = form.layout
    out: list[tuple[str, float]] = []
    for h, v in enumerate(form.a3 @ y):
        if v > tol:
            out.append((f"latency_endpoint0[{h}]", float(v)))
    for j, v in enumerate(form.a4 @ y):
        if v > tol:
            out.append((f"latency_endpoint1[{j + 1}]", float(v)))
    for p, v in enumerate(form.a5 @ y - 1.0):
        if abs(v) > tol:
            out.append((f"row_sum[{p}]", float(v)))
    for p in range(lay.q):
        v = y[p] * (y[p] - 1.0)
        if abs(v) > tol:
            out.append((f"binary[{p}]", float(v)))
    g = y[lay.gamma_index]
    if g * (g - 1.0) > tol:
        out.append(("gamma_range", float(g * (g - 1.0))))
    return out
