"""Rank-relaxed semidefinite form of the quadratic program and a dense
primal-dual interior-point solver for it.

The flattened decision y is lifted to Z = [y; 1][y; 1]', turning the
quadratic cost and constraints into traces against constant symmetric
matrices.  Dropping the rank-one condition leaves a convex conic program:
minimize <B0, Z> over PSD Z subject to linear trace constraints.  The
solver below handles the standard form (one dense PSD block plus
nonnegative scalar slacks, equality constraints only) and is generic; it
is also exercised on unrelated small conic programs in the tests.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from threadpoolctl import threadpool_limits

from .linalg import as_symmetric, eigh
from .qcqp import QcqpForm, YLayout

__all__ = [
    "HomogenizedProblem",
    "SdpConstraint",
    "SdpProblem",
    "SdpSolution",
    "SdpSolverError",
    "homogenize",
    "to_standard_form",
    "solve",
    "rank_one_check",
    "dump_standard_form",
    "STATUS_OPTIMAL",
    "STATUS_MAX_ITER",
    "STATUS_INFEASIBLE",
    "STATUS_NUMERICAL",
]

STATUS_OPTIMAL = "optimal"
STATUS_MAX_ITER = "max-iter"
STATUS_INFEASIBLE = "infeasible"
STATUS_NUMERICAL = "numerical-failure"


class SdpSolverError(RuntimeError):
    """Raised when the conic solver cannot produce a usable iterate."""


@dataclass(frozen=True)
class HomogenizedProblem:
    """Trace-form data of the lifted program.

    ``b0_mat`` carries the quadratic cost block with the linear part split
    into the border; ``h``/``j`` embed the endpoint latency rows, ``g`` the
    row-sum rows, ``k_eq`` the binary-slot equalities, and ``k_ineq`` the
    gamma interval condition.  ``t_max`` is a valid upper bound on the
    epigraph variable (sum over tasks of the worst per-task coefficient).
    """

    layout: YLayout
    order: int
    b0_mat: np.ndarray
    h: tuple[np.ndarray, ...]
    j: tuple[np.ndarray, ...]
    g: tuple[np.ndarray, ...]
    k_eq: tuple[np.ndarray, ...]
    k_ineq: np.ndarray
    lambda_t: float
    t_max: float


def _border(order: int, row: np.ndarray) -> np.ndarray:
    """Symmetric matrix whose trace against [y;1][y;1]' equals row . y."""
    mat = np.zeros((order, order))
    mat[: row.size, -1] = row / 2.0
    mat[-1, : row.size] = row / 2.0
    return mat


def homogenize(form: QcqpForm) -> HomogenizedProblem:
    """Lift the quadratic program data to trace form."""
    lay = form.layout
    order = lay.lifted_order
    q2 = lay.length

    b0_mat = np.zeros((order, order))
    b0_mat[:q2, :q2] = form.a6
    b0_mat[:q2, -1] += form.b0 / 2.0
    b0_mat[-1, :q2] += form.b0 / 2.0

    h = tuple(_border(order, form.a3[i]) for i in range(form.a3.shape[0]))
    j = tuple(_border(order, form.a4[i]) for i in range(form.a4.shape[0]))
    g = tuple(_border(order, form.a5[i]) for i in range(form.a5.shape[0]))

    def k_matrix(slot: int) -> np.ndarray:
        mat = np.zeros((order, order))
        mat[slot, slot] = 1.0
        mat[slot, -1] = -0.5
        mat[-1, slot] = -0.5
        return mat

    k_eq = tuple(k_matrix(p) for p in range(lay.q))
    k_ineq = k_matrix(lay.gamma_index)

    per_task_worst = np.maximum(
        form.g0, np.maximum(form.d, form.e_mat).max(axis=1)
    )
    t_max = float(np.sum(per_task_worst))

    return HomogenizedProblem(
        layout=lay,
        order=order,
        b0_mat=as_symmetric(b0_mat),
        h=h,
        j=j,
        g=g,
        k_eq=k_eq,
        k_ineq=k_ineq,
        lambda_t=form.lambda_t,
        t_max=t_max,
    )


@dataclass(frozen=True)
class SdpConstraint:
    """One trace equality <matrix, Z> + slack = rhs (slack = -1 means none)."""

    matrix: np.ndarray
    rhs: float
    slack: int = -1
    label: str = ""


@dataclass(frozen=True)
class SdpProblem:
    """Standard-form conic program: one dense PSD block plus scalar slacks."""

    order: int
    n_slacks: int
    cost: np.ndarray
    constraints: tuple[SdpConstraint, ...]

    @property
    def rhs(self) -> np.ndarray:
        return np.array([c.rhs for c in self.constraints])


def to_standard_form(
    hp: HomogenizedProblem,
    *,
    pin_gamma_zero: bool = False,
    bound_t_diag: bool = False,
) -> SdpProblem:
    """Convert the lifted program to equality standard form.

    Each inequality gains one nonnegative slack.  When the latency weight
    is zero the epigraph slot is unbounded by the cost, so a redundant
    linear cap t <= t_max is added to keep the program bounded.

    ``bound_t_diag`` additionally caps the epigraph diagonal entry of Z at
    (1 + t_max)^2.  No constraint of the plain form touches that entry, so
    without the cap the optimal set is unbounded along it and the central
    path is ill-posed; the cap is redundant for every lifted feasible
    decision and leaves the optimal value unchanged.  ``pin_gamma_zero``
    adds the equality that zeroes the gamma slot of the border column,
    which (with the gamma interval constraint) forces the whole gamma
    row/column of Z to zero -- the no-compression variant of the program.
    """
    order = hp.order
    lay = hp.layout
    cons: list[SdpConstraint] = []
    n_slacks = 0

    for idx, mat in enumerate(hp.h):
        cons.append(SdpConstraint(mat, 0.0, n_slacks, f"latency_endpoint0[{idx}]"))
        n_slacks += 1
    for idx, mat in enumerate(hp.j):
        cons.append(SdpConstraint(mat, 0.0, n_slacks, f"latency_endpoint1[{idx + 1}]"))
        n_slacks += 1
    for idx, mat in enumerate(hp.g):
        cons.append(SdpConstraint(mat, 1.0, -1, f"row_sum[{idx}]"))
    for idx, mat in enumerate(hp.k_eq):
        cons.append(SdpConstraint(mat, 0.0, -1, f"binary[{idx}]"))
    cons.append(SdpConstraint(hp.k_ineq, 0.0, n_slacks, "gamma_range"))
    n_slacks += 1
    corner = np.zeros((order, order))
    corner[-1, -1] = 1.0
    cons.append(SdpConstraint(corner, 1.0, -1, "homogeneous"))

    if hp.lambda_t == 0.0:
        row = np.zeros(lay.length)
        row[lay.t_index] = 1.0
        cons.append(SdpConstraint(_border(order, row), hp.t_max, n_slacks, "t_cap"))
        n_slacks += 1
    if bound_t_diag:
        diag = np.zeros((order, order))
        diag[lay.t_index, lay.t_index] = 1.0
        cons.append(
            SdpConstraint(diag, (1.0 + hp.t_max) ** 2, n_slacks, "t_diag_cap")
        )
        n_slacks += 1
    if pin_gamma_zero:
        row = np.zeros(lay.length)
        row[lay.gamma_index] = 1.0
        cons.append(SdpConstraint(_border(order, row), 0.0, -1, "gamma_pin"))

    return SdpProblem(order=order, n_slacks=n_slacks, cost=hp.b0_mat, constraints=tuple(cons))


@dataclass
class SdpSolution:
    """Solver output: primal dense block, slacks, duals, and diagnostics."""

    z: np.ndarray
    slacks: np.ndarray
    y: np.ndarray
    objective: float
    dual_objective: float
    status: str
    iterations: int
    res_primal: float
    res_dual: float
    res_gap: float
    history: list[tuple[float, float, float, float]] = field(default_factory=list)


def _max_step(x_mat: np.ndarray, dx_mat: np.ndarray, x_vec: np.ndarray, dx_vec: np.ndarray) -> float:
    """Largest alpha keeping x + alpha*dx in the cone (dense PSD x slacks)."""
    big = 1e12
    alpha = big
    try:
        chol = np.linalg.cholesky(x_mat)
    except np.linalg.LinAlgError:
        return 0.0
    w = sla.solve_triangular(chol, dx_mat, lower=True)
    w = sla.solve_triangular(chol, w.T, lower=True)
    lam_min = float(np.linalg.eigvalsh(0.5 * (w + w.T))[0])
    if lam_min < -1e-14:
        alpha = min(alpha, -1.0 / lam_min)
    if x_vec.size:
        neg = dx_vec < 0
        if np.any(neg):
            alpha = min(alpha, float(np.min(-x_vec[neg] / dx_vec[neg])))
    return alpha


def solve(
    problem: SdpProblem,
    *,
    tol: float = 1e-7,
    max_iter: int = 100,
    verbose: bool = False,
) -> SdpSolution:
    """Primal-dual path-following interior-point solve.

    Uses the classic predictor-corrector scheme with the dual-scaled
    symmetrized Newton direction: the Schur complement has entries
    Tr(A_i S^-1 A_j X) and stays symmetric positive definite while the
    iterates are interior.  Step lengths use a 0.98 fraction-to-boundary
    rule.  Termination: relative primal/dual residuals and relative
    duality gap all below tol.
    """
    # matrices here are tiny; BLAS thread fan-out costs far more than it saves
    with threadpool_limits(limits=1, user_api="blas"):
        return _solve_impl(problem, tol=tol, max_iter=max_iter, verbose=verbose)


def _solve_impl(
    problem: SdpProblem,
    *,
    tol: float,
    max_iter: int,
    verbose: bool,
) -> SdpSolution:
    n = problem.order
    m = len(problem.constraints)
    s = problem.n_slacks
    a_stack = np.stack([as_symmetric(c.matrix) for c in problem.constraints])
    a_flat = a_stack.reshape(m, n * n)
    b = problem.rhs
    c_mat = as_symmetric(problem.cost)

    slack_rows = np.array([i for i, c in enumerate(problem.constraints) if c.slack >= 0], dtype=int)
    slack_ids = np.array([c.slack for c in problem.constraints if c.slack >= 0], dtype=int)
    owner = np.full(s, -1, dtype=int)
    owner[slack_ids] = slack_rows
    if s and np.any(owner < 0):
        raise ValueError("every slack must appear in exactly one constraint")

    norm_b = float(np.linalg.norm(b))
    norm_c = float(np.linalg.norm(c_mat, "fro"))

    tau = 1.0 + (float(np.max(np.abs(b))) if m else 0.0)
    sigma0 = 1.0 + max(norm_c, max(float(np.linalg.norm(a)) for a in a_stack))
    x_mat = tau * np.eye(n)
    x_s = np.full(s, tau)
    s_mat = sigma0 * np.eye(n)
    s_s = np.full(s, sigma0)
    y = np.zeros(m)
    nu = n + s
    eta = 0.98

    def apply_a(dense: np.ndarray, vec: np.ndarray) -> np.ndarray:
        out = a_flat @ dense.T.ravel()
        if s:
            out[slack_rows] += vec[slack_ids]
        return out

    def a_adjoint(mult: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        dense = (mult @ a_flat).reshape(n, n)
        vec = mult[owner] if s else np.zeros(0)
        return dense, vec

    def stats() -> tuple[float, float, float, float, float, np.ndarray, np.ndarray, np.ndarray]:
        rp = b - apply_a(x_mat, x_s)
        atd, ats = a_adjoint(y)
        rd = c_mat - s_mat - atd
        rd_s = -s_s - ats if s else np.zeros(0)
        pobj = float(np.sum(c_mat * x_mat))
        dobj = float(b @ y)
        rel_p = float(np.linalg.norm(rp)) / (1.0 + norm_b)
        rel_d = float(np.sqrt(np.sum(rd * rd) + np.sum(rd_s * rd_s))) / (1.0 + norm_c)
        rel_g = abs(pobj - dobj) / (1.0 + abs(pobj) + abs(dobj))
        return pobj, dobj, rel_p, rel_d, rel_g, rp, rd, rd_s

    def snapshot(status: str, iters: int) -> SdpSolution:
        pobj, dobj, rel_p, rel_d, rel_g, *_ = stats()
        return SdpSolution(
            z=x_mat.copy(),
            slacks=x_s.copy(),
            y=y.copy(),
            objective=pobj,
            dual_objective=dobj,
            status=status,
            iterations=iters,
            res_primal=rel_p,
            res_dual=rel_d,
            res_gap=rel_g,
            history=history,
        )

    history: list[tuple[float, float, float, float]] = []
    best: SdpSolution | None = None
    best_maxres = np.inf
    stall = 0

    for it in range(max_iter):
        pobj, dobj, rel_p, rel_d, rel_g, rp, rd, rd_s = stats()
        mu = (float(np.sum(x_mat * s_mat)) + float(x_s @ s_s)) / nu
        history.append((mu, rel_p, rel_d, rel_g))
        maxres = max(rel_p, rel_d, rel_g)
        if verbose:
            print(f"  it {it:3d}  mu {mu:9.2e}  rp {rel_p:9.2e}  rd {rel_d:9.2e}  gap {rel_g:9.2e}")
        if maxres <= tol:
            return snapshot(STATUS_OPTIMAL, it)
        if maxres < best_maxres * 0.9:
            best_maxres = maxres
            best = snapshot("", it)
            stall = 0
        else:
            stall += 1
        if stall >= 20:
            diverging = float(np.linalg.norm(y)) > 1e8 * (1.0 + norm_b)
            status = STATUS_INFEASIBLE if diverging else STATUS_MAX_ITER
            sol = best if best is not None else snapshot("", it)
            sol.status = status
            return sol

        try:
            s_chol = np.linalg.cholesky(s_mat)
        except np.linalg.LinAlgError:
            sol = best if best is not None else snapshot("", it)
            sol.status = STATUS_NUMERICAL
            return sol
        s_inv_l = sla.solve_triangular(s_chol, np.eye(n), lower=True)
        s_inv = s_inv_l.T @ s_inv_l

        u = np.matmul(np.matmul(s_inv, a_stack), x_mat)
        schur = a_flat @ u.transpose(0, 2, 1).reshape(m, n * n).T
        if s:
            schur[slack_rows, slack_rows] += x_s[slack_ids] / s_s[slack_ids]
        schur = 0.5 * (schur + schur.T)
        ridge = 0.0
        schur_cho = None
        for _ in range(4):
            try:
                schur_cho = sla.cho_factor(schur + ridge * np.eye(m), lower=True)
                break
            except np.linalg.LinAlgError:
                ridge = max(ridge * 100.0, 1e-12 * (1.0 + np.trace(schur) / m))
        if schur_cho is None:
            sol = best if best is not None else snapshot("", it)
            sol.status = STATUS_NUMERICAL
            return sol

        v_mat = s_inv @ rd @ x_mat
        av = apply_a(v_mat, (x_s / s_s) * rd_s if s else np.zeros(0))

        def newton(rc_mat: np.ndarray, rc_s: np.ndarray):
            rhs = rp - apply_a(rc_mat, rc_s) + av
            dy = sla.cho_solve(schur_cho, rhs)
            atd, ats = a_adjoint(dy)
            ds_mat = 0.5 * ((rd - atd) + (rd - atd).T)
            ds_s = rd_s - ats if s else np.zeros(0)
            t_mat = s_inv @ ds_mat @ x_mat
            dx_mat = rc_mat - 0.5 * (t_mat + t_mat.T)
            dx_s = rc_s - (x_s / s_s) * ds_s if s else np.zeros(0)
            return dy, ds_mat, ds_s, dx_mat, dx_s

        # predictor (affine scaling)
        dy_a, ds_a, dss_a, dx_a, dxs_a = newton(-x_mat, -x_s)
        ap = min(1.0, _max_step(x_mat, dx_a, x_s, dxs_a))
        ad = min(1.0, _max_step(s_mat, ds_a, s_s, dss_a))
        mu_aff = (
            float(np.sum((x_mat + ap * dx_a) * (s_mat + ad * ds_a)))
            + float((x_s + ap * dxs_a) @ (s_s + ad * dss_a))
        ) / nu
        sigma = float(np.clip((max(mu_aff, 0.0) / mu) ** 3, 1e-12, 1.0))

        # corrector
        t2 = s_inv @ ds_a @ dx_a
        rc_mat = sigma * mu * s_inv - x_mat - 0.5 * (t2 + t2.T)
        rc_s = sigma * mu / s_s - x_s - dss_a * dxs_a / s_s if s else np.zeros(0)
        dy, ds_mat, ds_s, dx_mat, dx_s = newton(rc_mat, rc_s)

        ap = min(1.0, eta * _max_step(x_mat, dx_mat, x_s, dx_s))
        ad = min(1.0, eta * _max_step(s_mat, ds_mat, s_s, ds_s))
        if ap < 1e-10 and ad < 1e-10:
            sol = best if best is not None else snapshot("", it)
            sol.status = STATUS_NUMERICAL
            return sol

        x_mat = 0.5 * ((x_mat + ap * dx_mat) + (x_mat + ap * dx_mat).T)
        x_s = x_s + ap * dx_s
        y = y + ad * dy
        s_mat = 0.5 * ((s_mat + ad * ds_mat) + (s_mat + ad * ds_mat).T)
        s_s = s_s + ad * ds_s
        if not (np.all(np.isfinite(x_mat)) and np.all(np.isfinite(s_mat))):
            sol = best if best is not None else snapshot("", it)
            sol.status = STATUS_NUMERICAL
            return sol

    pobj, dobj, rel_p, rel_d, rel_g, *_ = stats()
    if max(rel_p, rel_d, rel_g) <= tol:
        return snapshot(STATUS_OPTIMAL, max_iter)
    sol = best if best is not None else snapshot("", max_iter)
    sol.status = STATUS_MAX_ITER
    return sol


def rank_one_check(z: np.ndarray, ratio_tol: float = 1e-6) -> tuple[bool, float, np.ndarray]:
    """Whether z is numerically rank one; returns (flag, lead value, lead vector).

    The test compares the two largest eigenvalues: rank one when
    lambda_2 / lambda_1 <= ratio_tol.
    """
    w, v = eigh(z)
    lam1 = float(w[-1])
    vec = v[:, -1].copy()
    if lam1 <= 0.0:
        return False, lam1, vec
    lam2 = float(w[-2]) if w.size >= 2 else 0.0
    return (max(lam2, 0.0) / lam1) <= ratio_tol, lam1, vec


def dump_standard_form(problem: SdpProblem) -> str:
    """Plain-text dump of the standard form, one constraint per line.

    Format::

        sdp order <n> slacks <s> constraints <m>
        cost <row> <col> <value> ...
        con <index> <label> slack <slack-index|-> rhs <rhs> <row> <col> <value> ...

    Matrix entries are the upper-triangle nonzeros of the symmetric
    constraint matrices, so a full matrix is recovered by mirroring.
    """
    lines = [f"sdp order {problem.order} slacks {problem.n_slacks} constraints {len(problem.constraints)}"]

    def triplets(mat: np.ndarray) -> str:
        rows, cols = np.nonzero(np.triu(mat))
        return " ".join(f"{r} {c} {mat[r, c]!r}" for r, c in zip(rows, cols))

    lines.append(f"cost {triplets(problem.cost)}")
    for idx, con in enumerate(problem.constraints):
        slack = str(con.slack) if con.slack >= 0 else "-"
        lines.append(f"con {idx} {con.label or '-'} slack {slack} rhs {con.rhs!r} {triplets(con.matrix)}")
    return "\n".join(lines) + "\n"
