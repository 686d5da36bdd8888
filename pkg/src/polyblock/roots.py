"""Eigenvalues of small complex matrices via their characteristic polynomial.

The characteristic polynomial comes from the Faddeev-LeVerrier recursion and
its roots from Aberth-Ehrlich simultaneous iteration.  Everything is batched
over a leading axis so a whole ray of stability samples is one call.
"""

from __future__ import annotations

import numpy as np

from .errors import RootFinderError

EPS = np.finfo(float).eps


def charpoly(M: np.ndarray) -> np.ndarray:
    """Monic characteristic polynomial coefficients, highest degree first.

    ``M`` has shape ``(..., n, n)``; the result has shape ``(..., n + 1)``.
    """
    M = np.asarray(M, dtype=complex)
    n = M.shape[-1]
    batch = M.shape[:-2]
    eye = np.broadcast_to(np.eye(n, dtype=complex), batch + (n, n))
    coeffs = np.zeros(batch + (n + 1,), dtype=complex)
    coeffs[..., 0] = 1.0
    Mk = np.zeros_like(M)
    for k in range(1, n + 1):
        Mk = M @ Mk + coeffs[..., k - 1, None, None] * eye
        coeffs[..., k] = -np.trace(M @ Mk, axis1=-2, axis2=-1) / k
    return coeffs


def _horner(coeffs, z):
    p = np.broadcast_to(coeffs[..., :1], z.shape).copy()
    dp = np.zeros_like(z)
    mag = np.broadcast_to(np.abs(coeffs[..., :1]), z.shape).copy()
    az = np.abs(z)
    for k in range(1, coeffs.shape[-1]):
        dp = dp * z + p
        p = p * z + coeffs[..., k:k + 1]
        mag = mag * az + np.abs(coeffs[..., k:k + 1])
    return p, dp, mag


def aberth(coeffs: np.ndarray, tol: float = 1e-12, maxiter: int = 200) -> np.ndarray:
    """Roots of polynomials given by ``coeffs`` (shape ``(..., n + 1)``)."""
    coeffs = np.asarray(coeffs, dtype=complex)
    batch = coeffs.shape[:-1]
    coeffs = coeffs.reshape(-1, coeffs.shape[-1])
    n = coeffs.shape[-1] - 1
    if n == 0:
        return np.zeros(batch + (0,), dtype=complex)
    if np.any(coeffs[:, 0] == 0):
        raise ValueError("leading coefficient must be nonzero")
    coeffs = coeffs / coeffs[:, :1]
    # Fujiwara root bound; the start circle is rotated off the real axis
    radius = 2.0 * np.max(np.abs(coeffs[:, 1:]) ** (1.0 / np.arange(1, n + 1)), axis=1) + 1e-3
    angles = 2 * np.pi * np.arange(n) / n + 0.4
    z = radius[:, None] * np.exp(1j * angles)[None, :] - coeffs[:, 1:2] / n
    done = np.zeros(z.shape, dtype=bool)
    for it in range(1, maxiter + 1):
        p, dp, mag = _horner(coeffs, z)
        small = np.abs(p) <= 4 * (n + 1) * EPS * mag
        done |= small
        with np.errstate(divide="ignore", invalid="ignore"):
            w = p / dp
            diff = z[:, :, None] - z[:, None, :]
            np.einsum("sii->si", diff)[...] = np.inf
            s = np.sum(1.0 / diff, axis=2)
            step = w / (1.0 - w * s)
        step = np.where(np.isfinite(step), step, 0.0)
        step = np.where(done, 0.0, step)
        z = z - step
        done |= np.abs(step) <= tol * np.maximum(1.0, np.abs(z))
        if done.all():
            return z.reshape(batch + (n,))
    raise RootFinderError("Aberth-Ehrlich iteration did not converge", maxiter)


def eigvals(M: np.ndarray, method: str = "aberth") -> np.ndarray:
    """Eigenvalues of ``M`` (shape ``(..., n, n)``).

    ``method="aberth"`` uses the characteristic polynomial route above;
    ``method="lapack"`` defers to :func:`numpy.linalg.eigvals`.
    """
    M = np.asarray(M, dtype=complex)
    if method == "lapack":
        return np.linalg.eigvals(M)
    if method != "aberth":
        raise ValueError(f"unknown eigenvalue method {method!r}")
    if M.shape[-1] == 1:
        return M[..., 0].copy()
    return aberth(charpoly(M))
