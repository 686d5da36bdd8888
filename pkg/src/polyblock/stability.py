"""Linear stability of block methods on the Dahlquist problem ``y' = lambda y``.

Applied to the test problem a block method becomes ``y^{[n+1]} = M y^{[n]}``
with ``M = (I - C - z D)^{-1} (A + z B)`` and ``z = r lambda``.  Public
functions take ``zeta = h lambda`` and divide by ``alpha`` exactly once, in
:func:`amplification_matrix`, so regions are drawn relative to the stepsize.
"""

from __future__ import annotations

import csv
import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .builder import BlockMatrices, MethodSpec, build_method
from .errors import AmplificationPoleError
from .roots import eigvals

ROOT_TOL = 1e-8
CLUSTER_RADIUS = 1e-6
RAY_SAMPLES = 400
RHO_RANGE = (1e-6, 1e8)
BISECTION_TOL = 0.1
EIG_METHOD = "lapack"


def _matrices(obj) -> BlockMatrices:
    return build_method(obj) if isinstance(obj, MethodSpec) else obj


def amplification_matrix(m: BlockMatrices, zeta_r) -> np.ndarray:
    """``M(zeta_r)`` for a scalar or array of node-radius-scaled ``zeta_r``.

    ``zeta_r = r lambda``; callers holding ``zeta = h lambda`` pass
    ``zeta / m.alpha`` (see :func:`amplification_at`).
    """
    zr = np.asarray(zeta_r, dtype=complex)
    q = m.q
    lhs = np.eye(q) - m.C - zr[..., None, None] * m.D
    rhs = m.A + zr[..., None, None] * m.B
    try:
        return np.linalg.solve(lhs, rhs)
    except np.linalg.LinAlgError:
        raise AmplificationPoleError(f"I - C - zD is singular at z={zeta_r}") from None


def amplification_at(m: BlockMatrices, zeta) -> np.ndarray:
    """Amplification matrix for ``zeta = h lambda``."""
    return amplification_matrix(m, np.asarray(zeta, dtype=complex) / m.alpha)


def limit_matrix(m: BlockMatrices) -> np.ndarray:
    """``lim_{z -> inf} M(z) = -D^{-1} B``."""
    try:
        cond = np.linalg.cond(m.D)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e12:
        raise AmplificationPoleError("D is singular; the z -> infinity limit does not exist")
    return -np.linalg.solve(m.D, m.B)


def _semisimple(M, cluster, lam):
    # geometric multiplicity must match the cluster size
    s = np.linalg.svd(M - lam * np.eye(M.shape[0]), compute_uv=False)
    scale = max(1.0, float(np.max(np.abs(M))))
    return int(np.sum(s <= 1e3 * CLUSTER_RADIUS * scale)) >= len(cluster)


def _verdict(M, ev, tol, cluster_radius):
    mod = np.abs(ev)
    if not np.all(np.isfinite(ev)) or mod.max() > 1 + tol:
        return False
    on_circle = np.flatnonzero(mod >= 1 - tol)
    for i in on_circle:
        close = np.flatnonzero(np.abs(ev - ev[i]) <= cluster_radius)
        if len(close) > 1 and not _semisimple(M, close, ev[close].mean()):
            return False
    return True


def is_root_stable(M, tol: float = ROOT_TOL, cluster_radius: float = CLUSTER_RADIUS,
                   method: str = EIG_METHOD) -> bool:
    """Power-boundedness test for a single matrix.

    Eigenvalues must satisfy ``|lambda| <= 1 + tol``; eigenvalues within
    ``cluster_radius`` of each other on the unit circle must be semisimple.
    """
    M = np.asarray(M, dtype=complex)
    if not np.all(np.isfinite(M)):
        return False
    return _verdict(M, eigvals(M, method), tol, cluster_radius)


def root_stable_batch(Ms, tol: float = ROOT_TOL, cluster_radius: float = CLUSTER_RADIUS,
                      method: str = EIG_METHOD):
    """Vectorised :func:`is_root_stable`; returns verdicts and spectral radii."""
    Ms = np.asarray(Ms, dtype=complex)
    finite = np.all(np.isfinite(Ms), axis=(-2, -1))
    safe = np.where(finite[:, None, None], Ms, 0.0)
    ev = eigvals(safe, method)
    radius = np.where(finite, np.abs(ev).max(axis=-1), np.inf)
    ok = finite & (radius <= 1 + tol)
    for i in np.flatnonzero(ok & (radius >= 1 - tol)):
        ok[i] = _verdict(Ms[i], ev[i], tol, cluster_radius)
    return ok, radius


def _samples_stable(m: BlockMatrices, zetas, **kw):
    zr = np.asarray(zetas, dtype=complex) / m.alpha
    try:
        Ms = amplification_matrix(m, zr)
    except AmplificationPoleError:
        Ms = np.empty((len(zr), m.q, m.q), dtype=complex)
        for i, z in enumerate(zr):
            try:
                Ms[i] = amplification_matrix(m, z)
            except AmplificationPoleError:
                Ms[i] = np.nan
    return root_stable_batch(Ms, **kw)


def limit_stable(m: BlockMatrices, **kw) -> bool:
    try:
        return is_root_stable(limit_matrix(m), **kw)
    except AmplificationPoleError:
        # no finite limit: fall back on a very large sample
        ok, _ = _samples_stable(m, [-1e12], **kw)
        return bool(ok[0])


@dataclass
class StabilityReport:
    angle_deg: float
    a90: bool
    root_stable: bool
    max_spectral_radius_sampled: float
    samples: int
    label: str = ""

    def to_json(self) -> dict:
        return asdict(self)


def _ray(theta_deg, rhos):
    return -rhos * np.exp(1j * np.radians(theta_deg))


def coarse_lhp_samples(n_radii: int = 25) -> np.ndarray:
    """Coarse samples of the negative real axis, the part of the left half plane every A(theta) region shares."""
    return _ray(0.0, np.logspace(-3, 6, n_radii))


def root_stable_at(m: BlockMatrices, **kw) -> bool:
    """Root stability at ``zeta = 0``, at ``zeta -> inf`` and on :func:`coarse_lhp_samples`."""
    if not is_root_stable(amplification_matrix(m, 0.0), **kw):
        return False
    if not limit_stable(m, **kw):
        return False
    ok, _ = _samples_stable(m, coarse_lhp_samples(), **kw)
    return bool(ok.all())


def stability_angle(method, ray_samples: int = RAY_SAMPLES, bisection_tol: float = BISECTION_TOL,
                    rho_range=RHO_RANGE, coarse_step: float = 1.0, **kw) -> StabilityReport:
    """Largest ``theta`` such that every ray ``zeta = -rho e^{i phi}``, ``phi <= theta``, is stable.

    Rays are scanned every ``coarse_step`` degrees and the first failing
    interval is bisected down to ``bisection_tol``.  Only rays in one half
    plane are sampled since regions of real-symmetric methods are symmetric
    about the real axis.
    """
    m = _matrices(method)
    rhos = np.logspace(np.log10(rho_range[0]), np.log10(rho_range[1]), ray_samples)
    count = 0
    worst = 0.0

    def ray_ok(theta):
        nonlocal count, worst
        ok, radius = _samples_stable(m, _ray(theta, rhos), **kw)
        count += len(rhos)
        if ok.all():
            worst = max(worst, float(radius.max()))
        return bool(ok.all())

    stable_root = root_stable_at(m, **kw)
    if not limit_stable(m, **kw) or not ray_ok(0.0):
        return StabilityReport(0.0, False, stable_root, worst, count, m.label)
    last_ok = 0.0
    failed = None
    for theta in np.arange(coarse_step, 90.0 + 1e-9, coarse_step):
        theta = min(float(theta), 90.0)
        if ray_ok(theta):
            last_ok = theta
        else:
            failed = theta
            break
    if failed is None:
        if last_ok < 90.0 and ray_ok(90.0):
            last_ok = 90.0
        elif last_ok < 90.0:
            failed = 90.0
    if failed is not None:
        lo, hi = last_ok, failed
        while hi - lo > bisection_tol:
            mid = 0.5 * (lo + hi)
            if ray_ok(mid):
                lo = mid
            else:
                hi = mid
        last_ok = lo
    a90 = failed is None and last_ok == 90.0
    return StabilityReport(float(last_ok), a90, stable_root, worst, count, m.label)


@dataclass
class AlphaSweep:
    alphas: list
    thetas: list
    a90: list
    root_stable: list
    root_stable_intervals: list = field(default_factory=list)
    a90_intervals: list = field(default_factory=list)

    def to_json(self) -> dict:
        return asdict(self)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["alpha", "theta_deg", "root_stable"])
        for a, t, rs in zip(self.alphas, self.thetas, self.root_stable):
            w.writerow([repr(float(a)), repr(float(t)), int(rs)])
        return buf.getvalue()


def _intervals(grid, flags):
    out, start = [], None
    for i, f in enumerate(flags):
        if f and start is None:
            start = i
        if start is not None and (not f or i == len(flags) - 1):
            end = i if f else i - 1
            out.append([grid[start], grid[end]])
            start = None
    return out


def _sweep_point(args):
    spec, alpha, kw = args
    m = build_method(spec.with_alpha(alpha))
    rep = stability_angle(m, **kw)
    return rep.angle_deg, rep.a90, rep.root_stable


def alpha_sweep(spec: MethodSpec, alphas, jobs: int = 1, **kw) -> AlphaSweep:
    grid = sorted(float(a) for a in alphas)
    tasks = [(spec, a, kw) for a in grid]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    thetas = [r[0] for r in results]
    a90 = [r[1] for r in results]
    rs = [r[2] for r in results]
    return AlphaSweep(grid, thetas, a90, rs, _intervals(grid, rs), _intervals(grid, a90))


@dataclass
class RegionGrid:
    re: np.ndarray
    im: np.ndarray
    stable: np.ndarray  # shape (len(im), len(re))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["zeta_re", "zeta_im", "stable"])
        for i, y in enumerate(self.im):
            for k, x in enumerate(self.re):
                w.writerow([repr(float(x)), repr(float(y)), int(self.stable[i, k])])
        return buf.getvalue()


def region_grid(method, re_range, im_range, nx: int, ny: int, **kw) -> RegionGrid:
    """Root-stability verdicts on an ``ny x nx`` lattice of ``zeta = h lambda`` (endpoints included)."""
    if nx < 2 or ny < 2:
        raise ValueError("region grids need at least two points per axis")
    m = _matrices(method)
    re = np.linspace(re_range[0], re_range[1], nx)
    im = np.linspace(im_range[0], im_range[1], ny)
    Z = re[None, :] + 1j * im[:, None]
    ok, _ = _samples_stable(m, Z.ravel(), **kw)
    return RegionGrid(re, im, ok.reshape(Z.shape))
