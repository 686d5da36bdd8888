"""Assembly of polynomial block methods and their coefficient matrices.

A method computes each output ``y_j^{[n+1]}`` by evaluating an ODE polynomial
at ``tau = z_j + alpha``.  Every polynomial is built over unit linear forms,
so its evaluation is one row of ``[A | B | C | D]`` in

    y^{[n+1]} = A y^{[n]} + r B f^{[n]} + C y^{[n+1]} + r D f^{[n+1]}.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass, field

import numpy as np

from . import interp
from .errors import ConfigurationError, ConsistencyError, PoisednessError
from .interp import DataSlot, InterpCondition, Kind, Phase
from .nodes import NodeSet, Ordering, chi, conjugate_pairing, generate_nodes, parse_ordering


class Family(str, enum.Enum):
    ADAMS = "adams"
    BDF = "bdf"
    GBDF = "gbdf"


class Strategy(str, enum.Enum):
    PMFC = "pmfc"
    SMVC = "smvc"
    SMFC = "smfc"
    PMFCMJ = "pmfcmj"
    SMFCMJ = "smfcmj"

    @property
    def serial(self) -> bool:
        return self in (Strategy.SMVC, Strategy.SMFC, Strategy.SMFCMJ)


class Implicitness(str, enum.Enum):
    EXPLICIT = "explicit"
    DIAGONALLY_IMPLICIT = "diagonally_implicit"
    FULLY_IMPLICIT = "fully_implicit"


class EndpointKind(str, enum.Enum):
    FIXED_INPUT = "fi"
    VARIABLE_INPUT = "vi"
    SWEEPING = "sweeping"


@dataclass(frozen=True)
class Endpoint:
    kind: EndpointKind
    ell: int | None = None

    def __str__(self):
        return f"fi{self.ell}" if self.kind is EndpointKind.FIXED_INPUT else self.kind.value


def _enum(cls, value, what):
    if isinstance(value, cls):
        return value
    try:
        return cls(str(value).lower())
    except ValueError:
        raise ConfigurationError(f"unknown {what} {value!r}") from None


def parse_implicitness(value) -> Implicitness:
    aliases = {"di": "diagonally_implicit", "implicit": "diagonally_implicit",
               "diagonally-implicit": "diagonally_implicit", "fully-implicit": "fully_implicit",
               "fi": "fully_implicit", "ex": "explicit"}
    if isinstance(value, str):
        value = aliases.get(value.lower(), value)
    return _enum(Implicitness, value, "implicitness")


def parse_endpoint(value, ell=None) -> Endpoint:
    if isinstance(value, Endpoint):
        return value
    text = str(value).lower().replace("-", "").replace("_", "")
    if text.startswith("fi") and text[2:].isdigit():
        return Endpoint(EndpointKind.FIXED_INPUT, int(text[2:]))
    aliases = {"fi": EndpointKind.FIXED_INPUT, "fixed": EndpointKind.FIXED_INPUT,
               "fixedinput": EndpointKind.FIXED_INPUT, "vi": EndpointKind.VARIABLE_INPUT,
               "variable": EndpointKind.VARIABLE_INPUT, "variableinput": EndpointKind.VARIABLE_INPUT,
               "s": EndpointKind.SWEEPING, "sweeping": EndpointKind.SWEEPING}
    if text not in aliases:
        raise ConfigurationError(f"unknown endpoint strategy {value!r}")
    kind = aliases[text]
    if kind is EndpointKind.FIXED_INPUT:
        if ell is None:
            raise ConfigurationError("fixed-input endpoints need ell")
        return Endpoint(kind, int(ell))
    return Endpoint(kind)


@dataclass(frozen=True)
class MethodSpec:
    family: Family
    strategy: Strategy
    implicitness: Implicitness
    nodes: NodeSet
    alpha: float
    endpoint: Endpoint | None = None

    def __post_init__(self):
        if not (self.alpha > 0 and math.isfinite(self.alpha)):
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        if self.family is Family.ADAMS and self.endpoint is None:
            raise ConfigurationError("Adams methods need an endpoint strategy")
        if self.family is not Family.ADAMS and self.endpoint is not None:
            raise ConfigurationError("BDF/GBDF methods do not take an endpoint strategy")
        if self.strategy.serial and self.nodes.ordering is Ordering.CLASSICAL:
            raise ConfigurationError(
                f"{self.strategy.value} needs inward or outward node ordering")

    @property
    def q(self) -> int:
        return self.nodes.q

    def with_alpha(self, alpha: float) -> MethodSpec:
        return MethodSpec(self.family, self.strategy, self.implicitness, self.nodes,
                          float(alpha), self.endpoint)

    def label(self) -> str:
        parts = [self.family.value, self.strategy.value, self.nodes.family.value,
                 self.nodes.ordering.value, f"q={self.q}", f"a={self.alpha:g}"]
        if self.endpoint is not None:
            parts.insert(2, str(self.endpoint))
        if self.implicitness is not Implicitness.DIAGONALLY_IMPLICIT:
            parts.append(self.implicitness.value)
        return ":".join(parts)

    def to_json(self) -> dict:
        out = {
            "family": self.family.value,
            "strategy": self.strategy.value,
            "implicitness": self.implicitness.value,
            "node_family": self.nodes.family.value,
            "ordering": self.nodes.ordering.value,
            "q": self.q,
            "alpha": self.alpha,
        }
        if self.endpoint is not None:
            out["endpoint"] = self.endpoint.kind.value
            if self.endpoint.ell is not None:
                out["ell"] = self.endpoint.ell
        return out


def make_spec(family, strategy, q, alpha, node_family="equispaced", ordering="inward",
              implicitness="diagonally_implicit", endpoint=None, ell=None) -> MethodSpec:
    family = _enum(Family, family, "family")
    strategy = _enum(Strategy, strategy, "strategy")
    nodes = generate_nodes(node_family, q, ordering)
    ep = None if endpoint is None else parse_endpoint(endpoint, ell)
    return MethodSpec(family, strategy, parse_implicitness(implicitness), nodes, float(alpha), ep)


@dataclass(frozen=True)
class ActiveIndexSets:
    I: tuple[frozenset, ...]
    B: tuple[frozenset, ...]
    O: tuple[frozenset, ...]


def previous_outputs(j: int, q: int, ordering) -> frozenset:
    """Outputs available to output ``j`` without breaking conjugate symmetry.

    These are all outputs preceding the conjugate pair containing ``j``,
    i.e. ``{1, ..., chi_in(j) - 1}``.
    """
    return frozenset(range(1, chi("in", j, q, ordering)))


def active_index_sets(strategy, q: int, ordering, implicitness) -> ActiveIndexSets:
    strategy = _enum(Strategy, strategy, "strategy")
    ordering = parse_ordering(ordering)
    implicitness = parse_implicitness(implicitness)
    if strategy.serial and ordering is Ordering.CLASSICAL:
        raise ConfigurationError(f"{strategy.value} needs inward or outward node ordering")
    everything = frozenset(range(1, q + 1))
    I, B, O = [], [], []
    for j in range(1, q + 1):
        if strategy is Strategy.PMFC:
            Ij, Bj = everything, frozenset()
        elif strategy is Strategy.PMFCMJ:
            Ij, Bj = everything - {j}, frozenset()
        else:
            Bj = previous_outputs(j, q, ordering)
            if strategy is Strategy.SMVC:
                Ij = everything
            else:
                Ij = frozenset(range(chi("in", j, q, ordering), q + 1))
                if strategy is Strategy.SMFCMJ:
                    Ij = Ij - {j}
        if implicitness is Implicitness.EXPLICIT:
            Oj = Bj
        elif implicitness is Implicitness.DIAGONALLY_IMPLICIT:
            Oj = Bj | {j}
        else:
            Oj = Bj | everything
        I.append(Ij)
        B.append(Bj)
        O.append(Oj)
    return ActiveIndexSets(tuple(I), tuple(B), tuple(O))


@dataclass(frozen=True)
class ExpansionPlan:
    endpoints: tuple[complex, ...]
    anchors: tuple[DataSlot, ...]


def _fixed_input_classical(j: int, q: int, ell: int) -> int:
    if q % 2 == 0:
        return ell if j <= q // 2 else q - ell + 1
    mid = (q + 1) // 2
    if j < mid:
        return ell
    if j == mid:
        return mid
    return q - ell + 1


def expansion_plan(endpoint, nodes: NodeSet, alpha: float) -> ExpansionPlan:
    """Endpoints ``b_j`` and the anchor slot whose value is the constant ``L_y``."""
    endpoint = parse_endpoint(endpoint)
    q = nodes.q
    z = nodes.values
    anchors = []
    if endpoint.kind is EndpointKind.VARIABLE_INPUT:
        anchors = [DataSlot(j, Phase.INPUT, Kind.VALUE) for j in range(1, q + 1)]
    elif endpoint.kind is EndpointKind.FIXED_INPUT:
        ell = endpoint.ell
        if ell is None or not 1 <= ell <= q:
            raise ConfigurationError(f"fixed-input ell={ell} outside 1..{q}")
        classical = nodes.reordered(Ordering.CLASSICAL).values
        for j in range(1, q + 1):
            c = classical.index(z[j - 1]) + 1
            k = z.index(classical[_fixed_input_classical(c, q, ell) - 1]) + 1
            anchors.append(DataSlot(k, Phase.INPUT, Kind.VALUE))
    else:
        ordering = nodes.ordering
        if ordering is Ordering.CLASSICAL:
            raise ConfigurationError("sweeping endpoints need inward or outward ordering")
        for j in range(1, q + 1):
            if ordering is Ordering.INWARD or q % 2 == 0:
                if j <= 2:
                    slot = DataSlot(j, Phase.INPUT, Kind.VALUE)
                elif q % 2 == 1 and j == q:
                    slot = DataSlot(q, Phase.INPUT, Kind.VALUE)
                else:
                    slot = DataSlot(j - 2, Phase.OUTPUT, Kind.VALUE)
            else:
                # outward, odd q; the j > 3 branch anchors on an input as written
                if j == 1:
                    slot = DataSlot(1, Phase.INPUT, Kind.VALUE)
                elif j <= 3:
                    slot = DataSlot(1, Phase.OUTPUT, Kind.VALUE)
                else:
                    slot = DataSlot(j - 2, Phase.INPUT, Kind.VALUE)
            anchors.append(slot)
    endpoints = tuple(a.tau(z, alpha) for a in anchors)
    return ExpansionPlan(endpoints, tuple(anchors))


@dataclass(frozen=True, eq=False)
class BlockMatrices:
    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    alpha: float
    label: str = ""

    @property
    def q(self) -> int:
        return self.A.shape[0]

    def as_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}

    def consistency_residual(self) -> float:
        ones = np.ones(self.q)
        return float(np.max(np.abs((self.A + self.C) @ ones - ones)))

    def to_json(self) -> dict:
        out = {"label": self.label, "alpha": self.alpha, "q": self.q}
        for name, M in self.as_dict().items():
            out[name] = {"re": M.real.tolist(), "im": M.imag.tolist()}
        return out

    @classmethod
    def from_json(cls, data: dict) -> BlockMatrices:
        mats = {k: np.array(data[k]["re"]) + 1j * np.array(data[k]["im"]) for k in "ABCD"}
        return cls(alpha=float(data["alpha"]), label=data.get("label", ""), **mats)

    def to_csv(self, name: str) -> str:
        M = self.as_dict()[name]
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow([f"{part}_{k + 1}" for k in range(self.q) for part in ("re", "im")])
        for row in M:
            writer.writerow([repr(float(v)) for x in row for v in (x.real, x.imag)])
        return buf.getvalue()


def _slot(j, phase, kind, q):
    return DataSlot(j, phase, kind).flat(q)


def _derivative_lagrange(Ij, Oj, z, alpha, width, q):
    conds = [InterpCondition(z[k - 1], Kind.VALUE, interp.unit_form(width, _slot(k, Phase.INPUT, Kind.DERIVATIVE, q)))
             for k in sorted(Ij)]
    conds += [InterpCondition(z[k - 1] + alpha, Kind.VALUE,
                              interp.unit_form(width, _slot(k, Phase.OUTPUT, Kind.DERIVATIVE, q)))
              for k in sorted(Oj)]
    if not conds:
        return interp.zero_poly(width)
    return interp.lagrange_fit(conds)


def ode_polynomial(spec: MethodSpec, j: int, sets: ActiveIndexSets | None = None,
                   plan: ExpansionPlan | None = None) -> interp.SymbolicPoly:
    """Symbolic ODE polynomial ``p_j`` (Adams polynomials include their endpoint)."""
    q, alpha = spec.q, spec.alpha
    width = 4 * q
    z = spec.nodes.values
    sets = sets or active_index_sets(spec.strategy, q, spec.nodes.ordering, spec.implicitness)
    Ij, Bj, Oj = sets.I[j - 1], sets.B[j - 1], sets.O[j - 1]
    explicit = spec.implicitness is Implicitness.EXPLICIT
    out_tau = z[j - 1] + alpha

    if spec.family is Family.ADAMS:
        plan = plan or expansion_plan(spec.endpoint, spec.nodes, alpha)
        anchor = plan.anchors[j - 1]
        if anchor.phase is Phase.OUTPUT and anchor.node_index not in Oj:
            raise ConfigurationError(
                f"output {j}: endpoint uses output {anchor.node_index}, which is not active")
        LF = _derivative_lagrange(Ij, Oj, z, alpha, width, q)
        base = interp.unit_form(width, anchor.flat(q))
        P = interp.antiderivative(LF)
        # L_y(b) + int_b^tau L_F
        shift = base - interp.evaluate(P, plan.endpoints[j - 1])
        return P + interp.constant(shift)

    conds = [InterpCondition(z[k - 1], Kind.VALUE, interp.unit_form(width, _slot(k, Phase.INPUT, Kind.VALUE, q)))
             for k in sorted(Ij)]
    if explicit:
        f_tilde = interp.evaluate(_derivative_lagrange(Ij, Oj, z, alpha, width, q), out_tau)
    if spec.family is Family.BDF:
        conds += [InterpCondition(z[k - 1] + alpha, Kind.VALUE,
                                  interp.unit_form(width, _slot(k, Phase.OUTPUT, Kind.VALUE, q)))
                  for k in sorted(Bj)]
        datum = f_tilde if explicit else interp.unit_form(width, _slot(j, Phase.OUTPUT, Kind.DERIVATIVE, q))
        conds.append(InterpCondition(out_tau, Kind.DERIVATIVE, datum))
    else:
        der_set = Bj if explicit else Oj
        conds += [InterpCondition(z[k - 1] + alpha, Kind.DERIVATIVE,
                                  interp.unit_form(width, _slot(k, Phase.OUTPUT, Kind.DERIVATIVE, q)))
                  for k in sorted(der_set)]
        if explicit:
            conds.append(InterpCondition(out_tau, Kind.DERIVATIVE, f_tilde))
    return interp.hermite_birkhoff_fit(conds)


def method_rows(spec: MethodSpec) -> np.ndarray:
    """``q x 4q`` matrix whose row ``j`` is the linear form of output ``j``."""
    q = spec.q
    sets = active_index_sets(spec.strategy, q, spec.nodes.ordering, spec.implicitness)
    plan = expansion_plan(spec.endpoint, spec.nodes, spec.alpha) if spec.family is Family.ADAMS else None
    rows = np.zeros((q, 4 * q), dtype=complex)
    for j in range(1, q + 1):
        try:
            p = ode_polynomial(spec, j, sets, plan)
        except PoisednessError as exc:
            raise PoisednessError(str(exc), output_index=j, conditions=exc.conditions) from exc
        rows[j - 1] = interp.evaluate(p, spec.nodes.values[j - 1] + spec.alpha)
    _check_locality(rows, sets, plan, q)
    return rows


def _check_locality(rows, sets, plan, q):
    for j in range(1, q + 1):
        row = rows[j - 1]
        allowed_out = set(sets.O[j - 1])
        if plan is not None and plan.anchors[j - 1].phase is Phase.OUTPUT:
            allowed_out.add(plan.anchors[j - 1].node_index)
        for k in range(1, q + 1):
            used = row[_slot(k, Phase.OUTPUT, Kind.VALUE, q)] != 0 or \
                row[_slot(k, Phase.OUTPUT, Kind.DERIVATIVE, q)] != 0
            if used and k not in allowed_out:
                raise ConsistencyError(f"output {j} depends on inactive output {k}")
        if row[_slot(j, Phase.OUTPUT, Kind.VALUE, q)] != 0:
            raise ConsistencyError(f"output {j} references its own value")


def build_method(spec: MethodSpec) -> BlockMatrices:
    rows = method_rows(spec)
    q = spec.q
    A, B, C, D = (rows[:, k * q:(k + 1) * q].copy() for k in range(4))
    return BlockMatrices(A, B, C, D, spec.alpha, spec.label())


def monomial_slot_data(nodes, alpha: float, k: int, t_n: complex = 0.0, r: float = 1.0) -> np.ndarray:
    """Exact slot data for ``y(t) = t**k`` (derivative slots hold ``r y'``)."""
    z = np.asarray(nodes, dtype=complex)
    t_in = t_n + r * z
    t_out = t_n + r * (z + alpha)

    def dy(t):
        return k * t ** (k - 1) if k > 0 else np.zeros_like(t)

    return np.concatenate([t_in ** k, r * dy(t_in), t_out ** k, r * dy(t_out)])


def row_monomial_errors(rows: np.ndarray, nodes, alpha: float, k: int) -> np.ndarray:
    """Relative reproduction error of each output row for ``y = t**k``."""
    q = rows.shape[0]
    data = monomial_slot_data(nodes, alpha, k)
    exact = data[2 * q:3 * q]
    return np.abs(rows @ data - exact) / np.maximum(1.0, np.abs(exact))


EXACTNESS_TOL = 1e-9


def exactness_degree(spec: MethodSpec, rows: np.ndarray | None = None, kmax: int | None = None) -> list[int]:
    """Largest ``k`` such that each output reproduces ``t**0 .. t**k`` exactly."""
    rows = method_rows(spec) if rows is None else rows
    kmax = 4 * spec.q + 4 if kmax is None else kmax
    q = spec.q
    degree = [-1] * q
    alive = np.ones(q, dtype=bool)
    for k in range(kmax + 1):
        ok = row_monomial_errors(rows, spec.nodes.values, spec.alpha, k) <= EXACTNESS_TOL
        alive &= ok
        for j in range(q):
            if alive[j]:
                degree[j] = k
        if not alive.any():
            break
    return degree


def nominal_degree(spec: MethodSpec) -> list[int]:
    """Degree of polynomial exactness implied by the interpolation conditions."""
    sets = active_index_sets(spec.strategy, spec.q, spec.nodes.ordering, spec.implicitness)
    out = []
    for Ij, Bj, Oj in zip(sets.I, sets.B, sets.O):
        if spec.family is Family.ADAMS:
            out.append(len(Ij) + len(Oj))
        elif spec.family is Family.BDF:
            out.append(len(Ij) + len(Bj))
        elif spec.implicitness is Implicitness.EXPLICIT:
            out.append(len(Ij) + len(Bj))
        else:
            out.append(len(Ij) + len(Oj) - 1)
    return out


@dataclass
class ConjugacyCheck:
    ok: bool
    deviation: float

    def __bool__(self):
        return self.ok


def verify_conjugate_structure(m: BlockMatrices, pairing, tol: float = 1e-12) -> ConjugacyCheck:
    """Row ``j`` must equal the conjugate of its partner's row, columns permuted."""
    perm = pairing.permutation(m.q)
    dev = 0.0
    for M in m.as_dict().values():
        mirrored = np.conj(M[np.ix_(perm, perm)])
        dev = max(dev, float(np.max(np.abs(M - mirrored))))
    return ConjugacyCheck(dev <= tol, dev)


def method_pairing(spec: MethodSpec):
    return conjugate_pairing(spec.nodes)
