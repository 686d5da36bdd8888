"""Polynomials whose coefficients are linear forms over a method's data slots.

A *linear form* is a complex vector of length ``4q`` holding weights for the
slots (input values, input derivatives, output values, output derivatives),
each block indexed by node.  Derivative slots carry the scaled derivative
``r f``.  Fitting, evaluating, differentiating and integrating such
polynomials produces rows of the block coefficient matrices directly.
"""

from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import PoisednessError, SingularFitError

PIVOT_RATIO_TOL = 1e-13


class Phase(enum.IntEnum):
    INPUT = 0
    OUTPUT = 1


class Kind(enum.IntEnum):
    VALUE = 0
    DERIVATIVE = 1


@dataclass(frozen=True)
class DataSlot:
    node_index: int  # 1-based
    phase: Phase
    kind: Kind

    def flat(self, q: int) -> int:
        if not 1 <= self.node_index <= q:
            raise IndexError(f"node index {self.node_index} outside 1..{q}")
        return (2 * int(self.phase) + int(self.kind)) * q + self.node_index - 1

    @classmethod
    def from_flat(cls, index: int, q: int) -> DataSlot:
        block, node = divmod(index, q)
        if not 0 <= block < 4:
            raise IndexError(f"flat index {index} outside 0..{4 * q - 1}")
        return cls(node + 1, Phase(block // 2), Kind(block % 2))

    def tau(self, nodes, alpha: float) -> complex:
        z = complex(nodes[self.node_index - 1])
        return z + alpha if self.phase is Phase.OUTPUT else z


def unit_form(width: int, index: int) -> np.ndarray:
    form = np.zeros(width, dtype=complex)
    form[index] = 1.0
    return form


@dataclass(frozen=True)
class InterpCondition:
    tau: complex
    kind: Kind
    datum: np.ndarray


@dataclass(frozen=True, eq=False)
class SymbolicPoly:
    """``p(tau) = sum_k coeffs[k] tau**k`` with ``coeffs[k]`` a linear form."""

    coeffs: np.ndarray  # shape (degree + 1, width)

    @property
    def degree(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def width(self) -> int:
        return self.coeffs.shape[1]

    def concrete(self, data) -> np.ndarray:
        """Monomial coefficients after substituting concrete slot data."""
        return self.coeffs @ np.asarray(data)

    def __add__(self, other: SymbolicPoly) -> SymbolicPoly:
        n = max(self.coeffs.shape[0], other.coeffs.shape[0])
        out = np.zeros((n, self.width), dtype=complex)
        out[: self.coeffs.shape[0]] += self.coeffs
        out[: other.coeffs.shape[0]] += other.coeffs
        return SymbolicPoly(out)

    def __mul__(self, scalar) -> SymbolicPoly:
        return SymbolicPoly(self.coeffs * scalar)

    __rmul__ = __mul__


def constant(form) -> SymbolicPoly:
    return SymbolicPoly(np.atleast_2d(np.asarray(form, dtype=complex)))


def zero_poly(width: int) -> SymbolicPoly:
    return SymbolicPoly(np.zeros((1, width), dtype=complex))


def _fit(conditions) -> SymbolicPoly:
    if not conditions:
        raise PoisednessError("no interpolation conditions")
    seen = set()
    for c in conditions:
        key = (complex(c.tau), c.kind)
        if key in seen:
            raise SingularFitError(f"duplicate condition {c.kind.name.lower()} at tau={c.tau}",
                                   conditions=conditions)
        seen.add(key)
    n = len(conditions)
    taus = np.array([c.tau for c in conditions], dtype=complex)
    rho = float(np.max(np.abs(taus))) or 1.0
    s = taus / rho
    k = np.arange(n)
    V = np.zeros((n, n), dtype=complex)
    for row, c in enumerate(conditions):
        if c.kind is Kind.VALUE:
            V[row] = s[row] ** k
        else:
            V[row, 1:] = k[1:] * s[row] ** (k[1:] - 1) / rho
    rhs = np.array([c.datum for c in conditions], dtype=complex)
    with warnings.catch_warnings():
        # singular systems are reported below as poisedness failures
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(V, check_finite=True)
    pivots = np.abs(np.diag(lu))
    if pivots.min() < PIVOT_RATIO_TOL * pivots.max():
        desc = ", ".join(f"{c.kind.name.lower()}@{complex(c.tau):.4g}" for c in conditions)
        raise PoisednessError(f"condition set is not poised: {{{desc}}}", conditions=conditions)
    scaled = scipy.linalg.lu_solve((lu, piv), rhs)
    return SymbolicPoly(scaled / rho ** k[:, None])


def lagrange_fit(conditions) -> SymbolicPoly:
    """Interpolating polynomial through value conditions at distinct nodes."""
    taus = [complex(c.tau) for c in conditions]
    if len(set(taus)) != len(taus):
        raise SingularFitError("Lagrange fit with repeated nodes", conditions=conditions)
    return _fit([InterpCondition(c.tau, Kind.VALUE, c.datum) for c in conditions])


def hermite_birkhoff_fit(conditions) -> SymbolicPoly:
    """Least-degree polynomial matching mixed value and first-derivative conditions."""
    return _fit(list(conditions))


def evaluate(p: SymbolicPoly, tau) -> np.ndarray:
    out = np.zeros(p.width, dtype=complex)
    for c in p.coeffs[::-1]:
        out = out * tau + c
    return out


def differentiate(p: SymbolicPoly) -> SymbolicPoly:
    if p.degree == 0:
        return zero_poly(p.width)
    k = np.arange(1, p.degree + 1)
    return SymbolicPoly(p.coeffs[1:] * k[:, None])


def antiderivative(p: SymbolicPoly) -> SymbolicPoly:
    k = np.arange(1, p.degree + 2)
    coeffs = np.zeros((p.degree + 2, p.width), dtype=complex)
    coeffs[1:] = p.coeffs / k[:, None]
    return SymbolicPoly(coeffs)


def integrate_from(p: SymbolicPoly, b, tau_end) -> np.ndarray:
    """Linear form of the integral of ``p`` from ``b`` to ``tau_end``."""
    P = antiderivative(p)
    return evaluate(P, tau_end) - evaluate(P, b)
