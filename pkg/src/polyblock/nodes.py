"""Real-symmetric imaginary node sets, their orderings and conjugate structure."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InvalidOrderError, StructuralError, UnsupportedOrderingError

ZERO_TOL = 1e-14


class NodeFamily(str, enum.Enum):
    EQUISPACED = "equispaced"
    CHEBYSHEV = "chebyshev"
    CUSTOM = "custom"


class Ordering(str, enum.Enum):
    CLASSICAL = "classical"
    INWARD = "inward"
    OUTWARD = "outward"


_FAMILY_ALIASES = {
    "equispaced": NodeFamily.EQUISPACED,
    "iequi": NodeFamily.EQUISPACED,
    "equi": NodeFamily.EQUISPACED,
    "chebyshev": NodeFamily.CHEBYSHEV,
    "icheb": NodeFamily.CHEBYSHEV,
    "cheb": NodeFamily.CHEBYSHEV,
    "custom": NodeFamily.CUSTOM,
}

_ORDERING_ALIASES = {
    "classical": Ordering.CLASSICAL,
    "inward": Ordering.INWARD,
    "inwards": Ordering.INWARD,
    "outward": Ordering.OUTWARD,
    "outwards": Ordering.OUTWARD,
}


def parse_family(value) -> NodeFamily:
    if isinstance(value, NodeFamily):
        return value
    try:
        return _FAMILY_ALIASES[str(value).lower()]
    except KeyError:
        raise ConfigurationError(f"unknown node family {value!r}") from None


def parse_ordering(value) -> Ordering:
    if isinstance(value, Ordering):
        return value
    try:
        return _ORDERING_ALIASES[str(value).lower()]
    except KeyError:
        raise ConfigurationError(f"unknown node ordering {value!r}") from None


@dataclass(frozen=True)
class NodeSet:
    family: NodeFamily
    ordering: Ordering
    values: tuple[complex, ...]

    def __post_init__(self):
        _validate(self.values)
        if not _satisfies_ordering(self.values, self.ordering):
            raise StructuralError(f"nodes are not in {self.ordering.value} order")

    @property
    def q(self) -> int:
        return len(self.values)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.values, dtype=complex)

    def reordered(self, ordering) -> NodeSet:
        ordering = parse_ordering(ordering)
        return NodeSet(self.family, ordering, tuple(_apply_ordering(self.values, ordering)))

    def permutation_to(self, ordering) -> list[int]:
        """Indices ``p`` with ``self.reordered(ordering).values[k] == self.values[p[k]]``."""
        target = self.reordered(ordering).values
        return [self.values.index(z) for z in target]

    def to_json(self) -> dict:
        return {
            "family": self.family.value,
            "ordering": self.ordering.value,
            "q": self.q,
            "re": [float(z.real) for z in self.values],
            "im": [float(z.imag) for z in self.values],
        }

    @classmethod
    def from_json(cls, data: dict) -> NodeSet:
        values = tuple(complex(a, b) for a, b in zip(data["re"], data["im"]))
        if len(values) != data["q"]:
            raise ConfigurationError("node count does not match q")
        return cls(parse_family(data["family"]), parse_ordering(data["ordering"]), values)


@dataclass(frozen=True)
class ConjugatePairing:
    pairs: tuple[tuple[int, int], ...]
    self_conjugate: tuple[int, ...]

    def partner(self, j: int) -> int:
        """1-based conjugate partner of node ``j`` (itself when self-conjugate)."""
        for a, b in self.pairs:
            if a == j:
                return b
            if b == j:
                return a
        return j

    def permutation(self, q: int) -> np.ndarray:
        """0-based index map sending each node to its conjugate."""
        return np.array([self.partner(j) - 1 for j in range(1, q + 1)])


def _validate(values):
    if len(values) < 1:
        raise InvalidOrderError("node set is empty")
    z = np.array(values, dtype=complex)
    if np.any(np.abs(z.real) > ZERO_TOL):
        raise StructuralError("nodes must be purely imaginary")
    for k, zk in enumerate(z):
        if np.min(np.abs(z - np.conj(zk))) > ZERO_TOL:
            raise StructuralError(f"node {zk} has no conjugate in the set")
        if np.sum(np.abs(z - zk) <= ZERO_TOL) > 1:
            raise StructuralError(f"node {zk} is repeated")


def _apply_ordering(values, ordering: Ordering) -> list[complex]:
    # ties in modulus go to the upper half plane first
    if ordering is Ordering.CLASSICAL:
        key = lambda z: -z.imag
    elif ordering is Ordering.INWARD:
        key = lambda z: (-abs(z.imag), -z.imag)
    else:
        key = lambda z: (abs(z.imag), -z.imag)
    return sorted(values, key=key)


def _satisfies_ordering(values, ordering: Ordering) -> bool:
    return list(values) == _apply_ordering(values, ordering)


def _classical_imag_parts(family: NodeFamily, q: int) -> list[float]:
    # built antisymmetrically so conjugate pairs are exact negations
    half = q // 2
    if family is NodeFamily.EQUISPACED:
        top = [(q - 1 - 2 * j) / (q - 1) for j in range(half)]
    else:
        top = [float(np.cos(np.pi * j / (q - 1))) for j in range(half)]
    middle = [0.0] if q % 2 else []
    return top + middle + [-v for v in reversed(top)]


def generate_nodes(family, q: int, ordering="classical") -> NodeSet:
    """Imaginary equispaced or Chebyshev nodes spanning ``[-i, i]``.

    Equispaced nodes are ``-i + 2i(j-1)/(q-1)`` and Chebyshev nodes are
    ``i cos(pi (j-1)/(q-1))``; both are returned in the requested ordering.
    """
    family = parse_family(family)
    ordering = parse_ordering(ordering)
    if not isinstance(q, (int, np.integer)) or q < 2:
        raise InvalidOrderError(f"need at least two nodes, got q={q!r}")
    if q > 12:
        raise InvalidOrderError(f"q={q} exceeds the supported maximum of 12")
    if family is NodeFamily.CUSTOM:
        raise ConfigurationError("custom node sets are built with custom_nodes()")
    values = [complex(0.0, v) for v in _classical_imag_parts(family, q)]
    return NodeSet(family, ordering, tuple(_apply_ordering(values, ordering)))


def custom_nodes(values, ordering="classical") -> NodeSet:
    ordering = parse_ordering(ordering)
    values = [complex(0.0, complex(v).imag) if abs(complex(v).real) <= ZERO_TOL else complex(v)
              for v in values]
    return NodeSet(NodeFamily.CUSTOM, ordering, tuple(_apply_ordering(values, ordering)))


def chi(direction: str, j: int, q: int, ordering) -> int:
    """Index shift functions for sweeping orderings (1-based ``j``)."""
    ordering = parse_ordering(ordering)
    if not 1 <= j <= q:
        raise ConfigurationError(f"index j={j} outside 1..{q}")
    if direction not in ("in", "out"):
        raise ConfigurationError(f"direction must be 'in' or 'out', got {direction!r}")
    if ordering is Ordering.INWARD:
        if direction == "in":
            return j if j % 2 else j - 1
        return 1 if j % 2 else 2
    if ordering is Ordering.OUTWARD:
        same_parity = (q - j) % 2 == 0
        if direction == "in":
            return max(1, j - 1) if same_parity else j
        return 1 if same_parity else 2
    raise UnsupportedOrderingError("chi is only defined for inward and outward orderings")


def conjugate_pairing(nodes: NodeSet) -> ConjugatePairing:
    z = nodes.array
    pairs, selfc, seen = [], [], set()
    for j in range(nodes.q):
        if j in seen:
            continue
        matches = [k for k in range(nodes.q) if abs(z[k] - np.conj(z[j])) <= ZERO_TOL]
        if not matches:
            raise StructuralError(f"node {z[j]} has no conjugate")
        k = matches[0]
        seen.update((j, k))
        if k == j:
            selfc.append(j + 1)
        else:
            pairs.append((j + 1, k + 1))
    return ConjugatePairing(tuple(pairs), tuple(selfc))
