"""Test problems, classical BDF reference methods and the convergence harness."""

from __future__ import annotations

import csv
import io
import math
import multiprocessing
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.integrate
import scipy.sparse

from .builder import BlockMatrices, MethodSpec, build_method
from .errors import ConfigurationError, IntegrationError, InvalidOrderError
from .integrator import BandedMatrix, NewtonConfig, NewtonStats, Problem, _march, integrate, newton_solve
from .interp import InterpCondition, Kind, differentiate, evaluate, lagrange_fit, unit_form


# ---------------------------------------------------------------- problems

def dahlquist_problem(lam: complex, y0: complex = 1.0, t0: float = 0.0) -> Problem:
    lam = complex(lam)
    y0 = complex(y0)
    return Problem(
        n=1,
        rhs=lambda t, y: lam * y,
        jacobian=lambda t, y: np.array([[lam]]),
        exact=lambda t: np.array([y0 * np.exp(lam * (t - t0))]),
        name=f"dahlquist(lambda={lam:g})",
        real_analytic=lam.imag == 0 and y0.imag == 0,
    )


def prothero_robinson_problem(lam: float = -50.0, y0: float | None = None, t0: float = 0.0) -> Problem:
    """``y' = lam (y - sin t) + cos t``; the exact solution is entire in ``t``."""
    y0 = math.sin(t0) if y0 is None else float(y0)
    c = y0 - math.sin(t0)
    return Problem(
        n=1,
        rhs=lambda t, y: lam * (y - np.sin(t)) + np.cos(t),
        jacobian=lambda t, y: np.array([[complex(lam)]]),
        exact=lambda t: np.array([np.sin(t) + c * np.exp(lam * (t - t0))]),
        name=f"prothero_robinson(lambda={lam:g})",
        real_analytic=True,
    )


@dataclass(frozen=True)
class BurgersConfig:
    nu: float = 3e-4
    N: int = 256
    t_end: float = 1.0

    def __post_init__(self):
        if self.N < 8:
            raise ConfigurationError("Burgers grid needs N >= 8")

    @property
    def dx(self) -> float:
        return 1.0 / (self.N + 1)

    @property
    def x(self) -> np.ndarray:
        return self.dx * np.arange(1, self.N + 1)

    def initial(self) -> np.ndarray:
        x = self.x
        return np.sin(3 * np.pi * x) ** 2 * (1 - x) ** 1.5


def burgers_operators(cfg: BurgersConfig):
    """Central ``D1`` and ``D2`` with homogeneous Dirichlet data, as sparse matrices."""
    n, dx = cfg.N, cfg.dx
    one = np.ones(n - 1)
    D1 = scipy.sparse.diags([-one, one], [-1, 1], format="csr") / (2 * dx)
    D2 = scipy.sparse.diags([one, -2 * np.ones(n), one], [-1, 0, 1], format="csr") / dx ** 2
    return D1, D2


def burgers_problem(cfg: BurgersConfig = BurgersConfig()) -> Problem:
    """``u_t = nu u_xx - u u_x`` on ``(0, 1)`` by second-order finite differences."""
    c2 = cfg.nu / cfg.dx ** 2
    c1 = 1.0 / (2 * cfg.dx)

    def rhs(t, u):
        padded = np.concatenate([[0.0], u, [0.0]])
        return c2 * (padded[2:] - 2 * u + padded[:-2]) - u * c1 * (padded[2:] - padded[:-2])

    def jac(t, u):
        padded = np.concatenate([[0.0], u, [0.0]])
        ab = np.zeros((3, len(u)), dtype=complex)
        ab[0, 1:] = c2 - c1 * u[:-1]
        ab[1] = -2 * c2 - c1 * (padded[2:] - padded[:-2])
        ab[2, :-1] = c2 + c1 * u[1:]
        return BandedMatrix(1, 1, ab)

    return Problem(cfg.N, rhs, jac, None, f"burgers(N={cfg.N}, nu={cfg.nu:g})", real_analytic=True)


@dataclass(frozen=True)
class NlsConfig:
    N: int = 64
    t_end: float = 1.0
    half_width: float = 4 * math.pi

    def __post_init__(self):
        if self.N % 2 or self.N < 4:
            raise ConfigurationError("NLS needs an even number of Fourier modes")

    @property
    def x(self) -> np.ndarray:
        L = 2 * self.half_width
        return -self.half_width + L * np.arange(self.N) / self.N

    def initial(self) -> np.ndarray:
        u = 1 + np.exp(1j * self.x / 4) / 100
        return np.concatenate([u.real, u.imag])


def fourier_d2(N: int, length: float) -> np.ndarray:
    """Dense periodic spectral second-derivative matrix on ``N`` equispaced points."""
    h = 2 * np.pi / N
    k = np.arange(N)
    col = np.empty(N)
    col[0] = -np.pi ** 2 / (3 * h ** 2) - 1 / 6
    with np.errstate(divide="ignore"):
        col[1:] = -0.5 * (-1.0) ** k[1:] / np.sin(h * k[1:] / 2) ** 2
    idx = (k[:, None] - k[None, :]) % N
    return col[idx] * (2 * np.pi / length) ** 2


def nls_problem(cfg: NlsConfig = NlsConfig()) -> Problem:
    """``i u_t + u_xx + |u|^2 u = 0`` split into ``u = a + i b`` with ``a``, ``b`` complexified."""
    N = cfg.N
    D2 = fourier_d2(N, 2 * cfg.half_width).astype(complex)

    def rhs(t, y):
        a, b = y[:N], y[N:]
        s = a * a + b * b
        return np.concatenate([-D2 @ b - b * s, D2 @ a + a * s])

    def jac(t, y):
        a, b = y[:N], y[N:]
        J = np.empty((2 * N, 2 * N), dtype=complex)
        J[:N, :N] = np.diag(-2 * a * b)
        J[:N, N:] = -D2 - np.diag(a * a + 3 * b * b)
        J[N:, :N] = D2 + np.diag(3 * a * a + b * b)
        J[N:, N:] = np.diag(2 * a * b)
        return J

    return Problem(2 * N, rhs, jac, None, f"nls(N={N})", real_analytic=True)


def reference_solution(problem: Problem, t_span, y0, rtol: float = 1e-13, atol: float = 1e-13,
                       method: str = "DOP853") -> np.ndarray:
    """High-accuracy real-time reference from :func:`scipy.integrate.solve_ivp`."""
    y0 = np.asarray(y0, dtype=complex)
    real = problem.real_analytic and np.all(y0.imag == 0)
    if real:
        fun = lambda t, y: problem.rhs(t, y.astype(complex)).real  # noqa: E731
        start = y0.real
    else:
        fun = lambda t, y: problem.rhs(t, y)  # noqa: E731
        start = y0
    sol = scipy.integrate.solve_ivp(fun, tuple(t_span), start, method=method, rtol=rtol, atol=atol)
    if not sol.success:
        raise IntegrationError(f"reference integration failed: {sol.message}")
    return sol.y[:, -1].astype(complex)


# ---------------------------------------------------------------- classical BDF

@dataclass(frozen=True)
class ClassicalBDF:
    """``y_{n+1} = sum_i a_i y_{n-i} + beta h f_{n+1}``, ``i = 0..k-1``."""

    k: int
    a: np.ndarray
    beta: float

    @property
    def label(self) -> str:
        return f"bdf{self.k}"

    def block_matrices(self) -> BlockMatrices:
        """Companion one-step form on the state ``(y_n, ..., y_{n-k+1})`` with ``h = r``."""
        k = self.k
        A = np.zeros((k, k), dtype=complex)
        A[0] = self.a
        A[1:, :-1] = np.eye(k - 1)
        D = np.zeros((k, k), dtype=complex)
        D[0, 0] = self.beta
        Z = np.zeros((k, k), dtype=complex)
        return BlockMatrices(A, Z, Z.copy(), D, 1.0, self.label)


def classical_bdf(k: int) -> ClassicalBDF:
    """BDF-``k`` from the polynomial through ``y`` at ``tau = -k+1, ..., 1`` with ``p'(1) = h f``."""
    if not 2 <= k <= 6:
        raise InvalidOrderError(f"classical BDF needs 2 <= k <= 6, got {k}")
    width = k + 1  # past values (tau = 0, -1, ...), then y_{n+1}
    conds = [InterpCondition(-float(i), Kind.VALUE, unit_form(width, i)) for i in range(k)]
    conds.append(InterpCondition(1.0, Kind.VALUE, unit_form(width, k)))
    form = evaluate(differentiate(lagrange_fit(conds)), 1.0)
    lead = form[k]
    a = (-form[:k] / lead).real
    return ClassicalBDF(k, a, float((1 / lead).real))


@dataclass
class MultistepResult:
    terminal: np.ndarray
    error: float | None
    stats: NewtonStats


def integrate_bdf(problem: Problem, method: ClassicalBDF, t_span, steps: int, y0=None,
                  newton: NewtonConfig = NewtonConfig()) -> MultistepResult:
    """Fixed-step BDF-k; starting values from the exact solution or fine RK4."""
    t0, t1 = map(float, t_span)
    h = (t1 - t0) / steps
    k = method.k
    if steps < k:
        raise ConfigurationError(f"BDF{k} needs at least {k} steps")
    if y0 is None:
        y0 = problem.exact(t0)
    y0 = np.asarray(y0, dtype=complex)
    hist = [y0]
    for i in range(1, k):
        if problem.exact is not None:
            hist.append(np.asarray(problem.exact(t0 + i * h), dtype=complex))
        else:
            hist.append(_march(problem, t0 + (i - 1) * h, hist[-1], t0 + i * h, 16, i))
    stats = NewtonStats()
    for n in range(k - 1, steps):
        c = sum(method.a[i] * hist[-1 - i] for i in range(k))
        t = t0 + (n + 1) * h
        y, _, its, res = newton_solve(problem, t, c, method.beta * h, newton, guess=hist[-1])
        stats.solves += 1
        stats.iterations.append(its)
        hist = hist[1:] + [y]
    y_end = hist[-1]
    err = None
    if problem.exact is not None:
        err = float(np.max(np.abs(y_end - problem.exact(t1))))
    return MultistepResult(y_end, err, stats)


# ---------------------------------------------------------------- convergence

# ten unit roundoffs, relative to the solution scale
NOISE_FLOOR = 10 * float(np.finfo(float).eps)


@dataclass
class ConvergenceRun:
    label: str
    problem: str
    hs: list
    errors: list
    newton_totals: list
    order: float | None
    fit_range: list = field(default_factory=list)
    conclusive: bool = False

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["h", "error", "newton_total"])
        for h, e, n in zip(self.hs, self.errors, self.newton_totals):
            w.writerow([repr(float(h)), repr(float(e)), int(n)])
        return buf.getvalue()

    def to_json(self) -> dict:
        return asdict(self)


def fit_order(hs, errors, noise_floor: float = NOISE_FLOOR, window: int = 4):
    """Least-squares slope of ``log e`` against ``log h`` on the asymptotic sub-range.

    Points are admissible when finite and above ``100 * noise_floor``.  The
    fit uses the last ``window`` points of the monotone run that ends at the
    smallest admissible ``h``.  Returns ``(order, indices)`` or ``(None, [])``.
    """
    order = np.argsort(hs)[::-1]  # decreasing h
    h = np.asarray(hs, dtype=float)[order]
    e = np.asarray(errors, dtype=float)[order]
    ok = np.isfinite(e) & (e > 100 * noise_floor)
    valid = np.flatnonzero(ok)
    if len(valid) < 2:
        return None, []
    run = [valid[-1]]
    for i in valid[-2::-1]:
        if i == run[0] - 1 and e[i] > e[run[0]]:
            run.insert(0, i)
        else:
            break
    run = run[-window:]
    if len(run) < 3:
        return None, []
    slope = np.polyfit(np.log(h[run]), np.log(e[run]), 1)[0]
    return float(slope), [int(order[i]) for i in run]


_TASKS: list = []


def _run_index(i):
    return _run_one(_TASKS[i])


def _run_one(args):
    problem, method, t_span, steps, y0, ref, conjugate, newton = args
    try:
        if isinstance(method, ClassicalBDF):
            res = integrate_bdf(problem, method, t_span, steps, y0, newton)
            y, n_its = res.terminal, res.stats.total_iterations
        else:
            tr = integrate(problem, method, t_span, steps, y0, newton, conjugate)
            y, n_its = tr.terminal, tr.stats.total_iterations
    except IntegrationError:
        return math.inf, 0
    if not np.all(np.isfinite(y)):
        return math.inf, n_its
    return float(np.max(np.abs(y - ref))), n_its


def convergence_study(problem: Problem, method, steps_list, t_span=(0.0, 1.0), y0=None,
                      reference=None, conjugate: bool = False, newton: NewtonConfig = NewtonConfig(),
                      noise_floor: float = NOISE_FLOOR, window: int = 4, jobs: int = 1) -> ConvergenceRun:
    """Errors at ``t_span[1]`` over a list of step counts plus an observed-order fit.

    ``method`` is a :class:`MethodSpec` or a :class:`ClassicalBDF`.  The
    reference is the exact solution when known, else ``reference`` (an array)
    or a :func:`reference_solution` run.
    """
    t0, t1 = map(float, t_span)
    if y0 is None:
        if problem.exact is None:
            raise ConfigurationError("initial value required when no exact solution is known")
        y0 = problem.exact(t0)
    if reference is None:
        reference = problem.exact(t1) if problem.exact is not None else reference_solution(problem, t_span, y0)
    reference = np.asarray(reference, dtype=complex)
    steps_list = [int(s) for s in steps_list]
    tasks = [(problem, method, t_span, s, y0, reference, conjugate, newton) for s in steps_list]
    if jobs > 1:
        # problems hold closures, so workers inherit the task list by forking
        global _TASKS
        _TASKS = tasks
        ctx = multiprocessing.get_context("fork")
        with ProcessPoolExecutor(jobs, mp_context=ctx) as pool:
            results = list(pool.map(_run_index, range(len(tasks))))
        _TASKS = []
    else:
        results = [_run_one(t) for t in tasks]
    hs = [(t1 - t0) / s for s in steps_list]
    errors = [r[0] for r in results]
    totals = [r[1] for r in results]
    scale = max(1.0, float(np.max(np.abs(reference))))
    order, idx = (None, [])
    if max(errors) > 0:
        order, idx = fit_order(hs, errors, noise_floor * scale, window)
    label = method.label() if isinstance(method, MethodSpec) else method.label
    return ConvergenceRun(label, problem.name, hs, errors, totals, order,
                          [hs[i] for i in idx], order is not None)


def log_steps(lo: int, hi: int, per_decade: int = 8) -> list:
    """Distinct integer step counts log-spaced between ``lo`` and ``hi``."""
    n = max(2, int(round(per_decade * math.log10(hi / lo))) + 1)
    return sorted({int(round(s)) for s in np.geomspace(lo, hi, n)})
