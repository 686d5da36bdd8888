"""Fixed-step integration of complexified initial value problems with a block method.

Inputs and outputs of a step live at complex times ``t_n + r z_j`` and
``t_n + r (z_j + alpha)``; the stepsize along the real axis is ``h = r alpha``.
"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from .builder import BlockMatrices, Implicitness, MethodSpec, build_method, verify_conjugate_structure
from .errors import (
    AnalyticityError,
    BlowUpError,
    ConfigurationError,
    NewtonError,
    PoisednessError,
    StructuralError,
)
from .interp import InterpCondition, Kind, hermite_birkhoff_fit, lagrange_fit
from .nodes import ZERO_TOL, ConjugatePairing, NodeSet, conjugate_pairing

log = logging.getLogger(__name__)

INIT_RTOL = 1e-11
INIT_MAX_SUBSTEPS = 2 ** 14


@dataclass(frozen=True)
class Problem:
    """``y' = f(t, y)`` in ``n`` complex unknowns.

    ``jacobian`` may return a dense array, a scipy sparse matrix or a
    :class:`BandedMatrix`.
    ``real_analytic`` asserts ``f(conj t, conj y) = conj f(t, y)``; it is
    what licenses the conjugate shortcut.
    """

    n: int
    rhs: Callable
    jacobian: Callable
    exact: Callable | None = None
    name: str = ""
    real_analytic: bool = False


@dataclass(frozen=True)
class BandedMatrix:
    """Band storage as used by :func:`scipy.linalg.solve_banded`."""

    lower: int
    upper: int
    data: np.ndarray  # (lower + upper + 1, n)

    def toarray(self) -> np.ndarray:
        n = self.data.shape[1]
        out = np.zeros((n, n), dtype=self.data.dtype)
        for k in range(-self.lower, self.upper + 1):
            row = self.upper - k
            if k >= 0:
                out[np.arange(n - k), np.arange(k, n)] = self.data[row, k:]
            else:
                out[np.arange(-k, n), np.arange(n + k)] = self.data[row, :n + k]
        return out

    def __matmul__(self, v):
        return self.toarray() @ v


@dataclass
class BlockState:
    t: float
    r: float
    Y: np.ndarray  # (q, n)
    F: np.ndarray  # (q, n), unscaled f

    def copy(self) -> BlockState:
        return BlockState(self.t, self.r, self.Y.copy(), self.F.copy())


@dataclass(frozen=True)
class NewtonConfig:
    atol: float = 1e-12
    rtol: float = 1e-12
    maxiter: int = 20

    def __post_init__(self):
        if self.atol <= 0 or self.rtol <= 0 or self.maxiter < 1:
            raise ConfigurationError("Newton tolerances and iteration cap must be positive")


@dataclass
class NewtonStats:
    solves: int = 0
    iterations: list = field(default_factory=list)
    residuals: list = field(default_factory=list)

    @property
    def total_iterations(self) -> int:
        return int(sum(self.iterations))

    def to_json(self) -> dict:
        return {"solves": self.solves, "total_iterations": self.total_iterations,
                "iterations": list(self.iterations)}


def _check_finite(Y, what):
    if not np.all(np.isfinite(Y)):
        raise BlowUpError(f"non-finite values in {what}")


# overflow is detected by the finiteness checks, not by warnings
@np.errstate(over="ignore", invalid="ignore")
def _rk4_path(problem, t0, y0, dt, n):
    y = np.array(y0, dtype=complex)
    t = complex(t0)
    f = problem.rhs
    for i in range(n):
        k1 = f(t, y)
        k2 = f(t + dt / 2, y + dt / 2 * k1)
        k3 = f(t + dt / 2, y + dt / 2 * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (i + 1) * dt
    return y


def _march(problem, t0, y0, target, substeps, j):
    dt_total = target - t0
    n = substeps
    coarse = _rk4_path(problem, t0, y0, dt_total / n, n)
    while True:
        fine = _rk4_path(problem, t0, y0, dt_total / (2 * n), 2 * n)
        if not (np.all(np.isfinite(coarse)) and np.all(np.isfinite(fine))):
            raise AnalyticityError(f"node {j}: non-finite values along the path to t={target}")
        scale = max(1.0, float(np.max(np.abs(fine))))
        if np.max(np.abs(fine - coarse)) <= INIT_RTOL * scale:
            return fine
        if 2 * n >= INIT_MAX_SUBSTEPS:
            log.warning("node %d: initialization did not reach %.0e after %d substeps", j, INIT_RTOL, 2 * n)
            return fine
        n *= 2
        coarse = fine


def init_block(problem: Problem, t0: float, y0, nodes: NodeSet, r: float, substeps: int = 16) -> BlockState:
    """Initial block ``Y_j ~ y(t0 + r z_j)`` by RK4 along straight complex paths."""
    y0 = np.asarray(y0, dtype=complex)
    z = nodes.array
    Y = np.empty((len(z), problem.n), dtype=complex)
    for j, zj in enumerate(z, start=1):
        if abs(zj) < ZERO_TOL:
            Y[j - 1] = y0
        else:
            Y[j - 1] = _march(problem, t0, y0, t0 + r * zj, substeps, j)
    F = np.array([problem.rhs(t0 + r * zj, y) for zj, y in zip(z, Y)])
    return BlockState(float(t0), float(r), Y, F)


def _linear_solve(J, res, coef, n):
    if isinstance(J, BandedMatrix):
        ab = -coef * J.data
        ab[J.upper] += 1.0
        return scipy.linalg.solve_banded((J.lower, J.upper), ab, res)
    if scipy.sparse.issparse(J):
        K = (scipy.sparse.identity(n, dtype=complex, format="csc") - coef * J).tocsc()
        return scipy.sparse.linalg.spsolve(K, res)
    K = np.eye(n, dtype=complex) - coef * np.asarray(J)
    return scipy.linalg.lu_solve(scipy.linalg.lu_factor(K), res)


def newton_solve(problem: Problem, t, c, coef, newton: NewtonConfig, guess=None):
    """Solve ``Y = c + coef f(t, Y)``; returns ``(Y, f(t, Y), iterations, residual history)``."""
    Y = np.array(c if guess is None else guess, dtype=complex)
    history = []
    for it in range(1, newton.maxiter + 1):
        fY = problem.rhs(t, Y)
        res = Y - c - coef * fY
        rnorm = float(np.max(np.abs(res)))
        history.append(rnorm)
        if not np.isfinite(rnorm):
            raise BlowUpError(f"non-finite Newton residual at t={t}")
        scale = max(float(np.max(np.abs(Y))), float(np.max(np.abs(c))), abs(coef) * float(np.max(np.abs(fY))))
        if rnorm <= newton.atol + newton.rtol * scale:
            return Y, fY, it - 1, history
        delta = _linear_solve(problem.jacobian(t, Y), res, coef, problem.n)
        Y = Y - delta
        if float(np.max(np.abs(delta))) <= newton.atol + newton.rtol * float(np.max(np.abs(Y))):
            fY = problem.rhs(t, Y)
            history.append(float(np.max(np.abs(Y - c - coef * fY))))
            return Y, fY, it, history
    raise NewtonError(f"Newton did not converge in {newton.maxiter} iterations at t={t}", history)


def _check_steppable(m: BlockMatrices, spec: MethodSpec):
    if spec.implicitness is Implicitness.FULLY_IMPLICIT:
        raise ConfigurationError("fully implicit methods need a coupled block solve, which is not supported")
    if np.any(np.triu(m.C, 0) != 0) or np.any(np.triu(m.D, 1) != 0):
        raise StructuralError("outputs must depend only on earlier outputs (C strictly lower, D lower triangular)")


@np.errstate(over="ignore", invalid="ignore")
def _output(j, m, state, Ynew, Fnew, problem, newton, stats, t_out):
    r = state.r
    c = m.A[j] @ state.Y + r * (m.B[j] @ state.F)
    c = c + m.C[j, :j] @ Ynew[:j] + r * (m.D[j, :j] @ Fnew[:j])
    d = m.D[j, j]
    if d == 0:
        Y = c
        _check_finite(Y, f"output {j + 1}")
        return Y, problem.rhs(t_out, Y)
    Y, F, its, hist = newton_solve(problem, t_out, c, r * d, newton)
    if stats is not None:
        stats.solves += 1
        stats.iterations.append(its)
        stats.residuals.append(hist)
    _check_finite(Y, f"output {j + 1}")
    return Y, F


def step(m: BlockMatrices, spec: MethodSpec, state: BlockState, problem: Problem,
         newton: NewtonConfig = NewtonConfig(), stats: NewtonStats | None = None) -> BlockState:
    """Advance the block by ``h = r alpha``; outputs are produced in index order."""
    _check_steppable(m, spec)
    z = spec.nodes.array
    q = len(z)
    Ynew = np.zeros_like(state.Y)
    Fnew = np.zeros_like(state.F)
    for j in range(q):
        t_out = state.t + state.r * (z[j] + spec.alpha)
        Ynew[j], Fnew[j] = _output(j, m, state, Ynew, Fnew, problem, newton, stats, t_out)
    return BlockState(state.t + state.r * spec.alpha, state.r, Ynew, Fnew)


def step_conjugate(m: BlockMatrices, spec: MethodSpec, state: BlockState, problem: Problem,
                   newton: NewtonConfig = NewtonConfig(), pairing: ConjugatePairing | None = None,
                   stats: NewtonStats | None = None) -> BlockState:
    """Like :func:`step`, computing one output per conjugate pair and mirroring the other."""
    _check_steppable(m, spec)
    if not problem.real_analytic:
        raise ConfigurationError("conjugate stepping needs a problem asserted real-analytic")
    pairing = pairing or conjugate_pairing(spec.nodes)
    check = verify_conjugate_structure(m, pairing)
    if not check:
        raise StructuralError(f"block matrices are not conjugate-structured (deviation {check.deviation:.2e})")
    z = spec.nodes.array
    q = len(z)
    Ynew = np.zeros_like(state.Y)
    Fnew = np.zeros_like(state.F)
    for j in range(q):
        p = pairing.partner(j + 1) - 1
        if p < j:
            Ynew[j], Fnew[j] = np.conj(Ynew[p]), np.conj(Fnew[p])
            continue
        t_out = state.t + state.r * (z[j] + spec.alpha)
        Ynew[j], Fnew[j] = _output(j, m, state, Ynew, Fnew, problem, newton, stats, t_out)
        if p == j:
            Ynew[j] = Ynew[j].real
            Fnew[j] = Fnew[j].real
    return BlockState(state.t + state.r * spec.alpha, state.r, Ynew, Fnew)


def terminal_value(state: BlockState, nodes: NodeSet) -> np.ndarray:
    """Solution estimate at the real time ``state.t``."""
    z = nodes.array
    for j, zj in enumerate(z):
        if abs(zj) < ZERO_TOL:
            return state.Y[j].copy()
    conds = [InterpCondition(zj, Kind.VALUE, y) for zj, y in zip(z, state.Y)]
    conds += [InterpCondition(zj, Kind.DERIVATIVE, state.r * f) for zj, f in zip(z, state.F)]
    try:
        p = hermite_birkhoff_fit(conds)
    except PoisednessError:
        log.warning("Hermite read-out not poised; falling back to value interpolation")
        p = lagrange_fit(conds[: len(z)])
    return p.coeffs[0].copy()


@dataclass
class Trajectory:
    times: list
    blocks: list  # list of (q, n) arrays
    terminal: np.ndarray
    error: float | None
    stats: NewtonStats
    newton_per_step: list

    def to_csv(self, components=(0,)) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        header = ["step", "t", "node_index"]
        for c in components:
            header += [f"re_y{c}", f"im_y{c}"]
        w.writerow(header)
        for n, (t, Y) in enumerate(zip(self.times, self.blocks)):
            for j, y in enumerate(Y, start=1):
                row = [n, repr(float(t)), j]
                for c in components:
                    row += [repr(float(y[c].real)), repr(float(y[c].imag))]
                w.writerow(row)
        return buf.getvalue()

    def newton_json(self) -> dict:
        out = self.stats.to_json()
        out["per_step"] = list(self.newton_per_step)
        return out


def integrate(problem: Problem, spec: MethodSpec, t_span, steps: int, y0=None,
              newton: NewtonConfig = NewtonConfig(), conjugate: bool = False,
              matrices: BlockMatrices | None = None, keep_blocks: bool = False,
              substeps: int = 16) -> Trajectory:
    """Take ``steps`` equal steps over ``t_span`` and read out the terminal value."""
    if int(steps) != steps or steps < 1:
        raise ConfigurationError("steps must be a positive integer")
    t0, t1 = map(float, t_span)
    h = (t1 - t0) / steps
    r = h / spec.alpha
    m = matrices if matrices is not None else build_method(spec)
    if y0 is None:
        if problem.exact is None:
            raise ConfigurationError("initial value required when no exact solution is known")
        y0 = problem.exact(t0)
    state = init_block(problem, t0, y0, spec.nodes, r, substeps)
    stats = NewtonStats()
    per_step = []
    times, blocks = [state.t], [state.Y.copy()] if keep_blocks else []
    advance = step_conjugate if conjugate else step
    for n in range(steps):
        before = stats.total_iterations
        state = advance(m, spec, state, problem, newton, stats=stats)
        per_step.append(stats.total_iterations - before)
        if keep_blocks:
            times.append(t0 + (n + 1) * h)
            blocks.append(state.Y.copy())
    state.t = t1
    y_end = terminal_value(state, spec.nodes)
    err = None
    if problem.exact is not None:
        err = float(np.max(np.abs(y_end - np.asarray(problem.exact(t1)))))
    return Trajectory(times if keep_blocks else [t1], blocks, y_end, err, stats, per_step)
