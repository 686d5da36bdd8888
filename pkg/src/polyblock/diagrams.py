"""SVG stencil diagrams for block methods.

Every stencil is drawn in the local time plane ``tau``: inputs sit at ``z_k``
and outputs at ``z_k + alpha``.  Scenes are plain data built from the active
index sets and the expansion plan, then rendered to deterministic SVG text.

Glyphs: inactive node = gray dot, value = black dot, derivative = black
square, value and derivative = black diamond, interpolated derivative =
hollow square, evaluation point = ring, expansion point = blue dot.
Node diagrams only distinguish active (black dot) from inactive nodes.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

from .builder import Family, Implicitness, MethodSpec, active_index_sets, expansion_plan
from .errors import ConfigurationError
from .interp import Phase


class MarkerClass(str, enum.Enum):
    INACTIVE = "inactive"
    VALUE = "active-value"
    DERIVATIVE = "active-derivative"
    BOTH = "active-both"
    INTERPOLATED = "interpolated"
    EVALUATION = "evaluation-point"
    EXPANSION = "expansion-point"


ACTIVE = {MarkerClass.VALUE, MarkerClass.DERIVATIVE, MarkerClass.BOTH, MarkerClass.INTERPOLATED}

INACTIVE_GRAY = "#b3b3b3"
EXPANSION_BLUE = "#1f5fbf"
PIXELS_PER_UNIT = 48
GAP = 0.4


@dataclass(frozen=True)
class Marker:
    position: complex
    cls: MarkerClass


@dataclass
class Stencil:
    title: str
    markers: list = field(default_factory=list)
    paths: list = field(default_factory=list)  # (start, end) pairs


@dataclass
class StencilScene:
    alpha: float
    title: str
    stencils: list

    @property
    def extent(self):
        return (-1.5, self.alpha + 1.5, -1.5, 1.5)

    def check(self):
        x0, x1, y0, y1 = self.extent
        for st in self.stencils:
            for m in st.markers:
                if not (x0 <= m.position.real <= x1 and y0 <= m.position.imag <= y1):
                    raise ValueError(f"marker at {m.position} outside the drawing extent")
            if sum(m.cls is MarkerClass.EVALUATION for m in st.markers) > 1:
                raise ValueError("a stencil has more than one evaluation point")


def _classify(value: bool, derivative: bool) -> MarkerClass:
    if value and derivative:
        return MarkerClass.BOTH
    if value:
        return MarkerClass.VALUE
    if derivative:
        return MarkerClass.DERIVATIVE
    return MarkerClass.INACTIVE


def _sets(spec: MethodSpec):
    return active_index_sets(spec.strategy, spec.q, spec.nodes.ordering, spec.implicitness)


def _grid(spec, in_cls, out_cls):
    """Markers for every input and output position, classes given per index."""
    z = spec.nodes.values
    out = [Marker(z[k], in_cls(k + 1)) for k in range(spec.q)]
    out += [Marker(z[k] + spec.alpha, out_cls(k + 1)) for k in range(spec.q)]
    return out


def node_scene(spec: MethodSpec) -> StencilScene:
    sets = _sets(spec)
    z = spec.nodes.values
    stencils = []
    for j in range(1, spec.q + 1):
        Ij, Oj = sets.I[j - 1], sets.O[j - 1]
        markers = _grid(spec, lambda k: MarkerClass.VALUE if k in Ij else MarkerClass.INACTIVE,
                        lambda k: MarkerClass.VALUE if k in Oj else MarkerClass.INACTIVE)
        markers.append(Marker(z[j - 1] + spec.alpha, MarkerClass.EVALUATION))
        stencils.append(Stencil(f"j = {j}", markers))
    return StencilScene(spec.alpha, spec.label(), stencils)


def scene_index_sets(scene: StencilScene, spec: MethodSpec):
    """Recover ``(I, O)`` per stencil from marker positions alone."""
    z = spec.nodes.values
    out = []
    for st in scene.stencils:
        active = {m.position for m in st.markers if m.cls in ACTIVE}
        Ij = frozenset(k + 1 for k in range(spec.q) if z[k] in active)
        Oj = frozenset(k + 1 for k in range(spec.q) if z[k] + spec.alpha in active)
        out.append((Ij, Oj))
    return out


def expansion_scene(spec: MethodSpec) -> StencilScene:
    if spec.family is not Family.ADAMS:
        raise ConfigurationError("expansion diagrams only apply to Adams methods")
    plan = expansion_plan(spec.endpoint, spec.nodes, spec.alpha)
    z = spec.nodes.values
    stencils = []
    for j in range(1, spec.q + 1):
        markers = _grid(spec, lambda k: MarkerClass.INACTIVE, lambda k: MarkerClass.INACTIVE)
        b = plan.endpoints[j - 1]
        target = z[j - 1] + spec.alpha
        markers.append(Marker(b, MarkerClass.EXPANSION))
        markers.append(Marker(target, MarkerClass.EVALUATION))
        stencils.append(Stencil(f"j = {j}", markers, [(b, target)]))
    return StencilScene(spec.alpha, spec.label(), stencils)


def polynomial_scenes(spec: MethodSpec) -> list:
    """One scene for ``H_y`` (BDF, GBDF) or two for ``L_y`` and ``L_F`` (Adams)."""
    sets = _sets(spec)
    z = spec.nodes.values
    alpha = spec.alpha
    explicit = spec.implicitness is Implicitness.EXPLICIT
    if spec.family is Family.ADAMS:
        plan = expansion_plan(spec.endpoint, spec.nodes, alpha)
        ly, lf = [], []
        for j in range(1, spec.q + 1):
            Ij, Oj = sets.I[j - 1], sets.O[j - 1]
            anchor = plan.anchors[j - 1]

            def value_at(phase, anchor=anchor):
                return lambda k: (MarkerClass.VALUE if anchor.phase is phase and anchor.node_index == k
                                  else MarkerClass.INACTIVE)

            eval_marker = Marker(z[j - 1] + alpha, MarkerClass.EVALUATION)
            ly.append(Stencil(f"j = {j}", _grid(spec, value_at(Phase.INPUT), value_at(Phase.OUTPUT)) + [eval_marker]))
            markers = _grid(spec, lambda k: _classify(False, k in Ij), lambda k: _classify(False, k in Oj))
            lf.append(Stencil(f"j = {j}", markers + [eval_marker]))
        return [StencilScene(alpha, spec.label() + " L_y", ly), StencilScene(alpha, spec.label() + " L_F", lf)]

    stencils = []
    for j in range(1, spec.q + 1):
        Ij, Bj, Oj = sets.I[j - 1], sets.B[j - 1], sets.O[j - 1]
        if spec.family is Family.BDF:
            out_value = Bj
            out_deriv = set() if explicit else {j}
        else:
            out_value = set()
            out_deriv = Bj if explicit else Oj

        def out_cls(k, j=j, out_value=out_value, out_deriv=out_deriv):
            if explicit and k == j:
                return MarkerClass.INTERPOLATED
            return _classify(k in out_value, k in out_deriv)

        markers = _grid(spec, lambda k, Ij=Ij: _classify(k in Ij, False), out_cls)
        markers.append(Marker(z[j - 1] + alpha, MarkerClass.EVALUATION))
        stencils.append(Stencil(f"j = {j}", markers))
    return [StencilScene(alpha, spec.label() + " H_y", stencils)]


# ---------------------------------------------------------------- rendering

def _f(x: float) -> str:
    s = f"{x:.4f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _glyph(m: Marker) -> str:
    x, y = _f(m.position.real), _f(-m.position.imag)
    r = 0.09
    c = m.cls
    if c is MarkerClass.INACTIVE:
        return f'<circle cx="{x}" cy="{y}" r="{_f(r)}" fill="{INACTIVE_GRAY}"/>'
    if c is MarkerClass.VALUE:
        return f'<circle cx="{x}" cy="{y}" r="{_f(r)}" fill="black"/>'
    if c in (MarkerClass.DERIVATIVE, MarkerClass.INTERPOLATED):
        fill = "black" if c is MarkerClass.DERIVATIVE else "white"
        return (f'<rect x="{_f(m.position.real - r)}" y="{_f(-m.position.imag - r)}" width="{_f(2 * r)}" '
                f'height="{_f(2 * r)}" fill="{fill}" stroke="black" stroke-width="0.025"/>')
    if c is MarkerClass.BOTH:
        px, py = m.position.real, -m.position.imag
        d = 1.3 * r
        pts = " ".join(f"{_f(a)},{_f(b)}" for a, b in ((px, py - d), (px + d, py), (px, py + d), (px - d, py)))
        return f'<polygon points="{pts}" fill="black"/>'
    if c is MarkerClass.EVALUATION:
        return f'<circle cx="{x}" cy="{y}" r="0.17" fill="none" stroke="black" stroke-width="0.03"/>'
    return f'<circle cx="{x}" cy="{y}" r="{_f(r)}" fill="{EXPANSION_BLUE}"/>'


def render(scene: StencilScene) -> str:
    """Deterministic SVG 1.1 text; one nested viewport per stencil."""
    scene.check()
    x0, x1, y0, y1 = scene.extent
    w, h = x1 - x0, y1 - y0
    n = len(scene.stencils)
    total_w = n * w + (n - 1) * GAP
    total_h = h + 0.5
    px = PIXELS_PER_UNIT
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{_f(total_w * px)}" '
        f'height="{_f(total_h * px)}" viewBox="0 0 {_f(total_w)} {_f(total_h)}">',
        "<defs>",
        '<marker id="arrow" viewBox="0 0 10 10" refX="9" refY="5" markerWidth="5" markerHeight="5" orient="auto">',
        '<path d="M0,0 L10,5 L0,10 z" fill="black"/>',
        "</marker>",
        "</defs>",
        f'<title>{scene.title}</title>',
    ]
    for i, st in enumerate(scene.stencils):
        ox = i * (w + GAP)
        out.append(f'<text x="{_f(ox + w / 2)}" y="0.35" font-size="0.3" text-anchor="middle" '
                   f'font-family="sans-serif">{st.title}</text>')
        out.append(f'<svg x="{_f(ox)}" y="0.5" width="{_f(w)}" height="{_f(h)}" '
                   f'viewBox="{_f(x0)} {_f(-y1)} {_f(w)} {_f(h)}">')
        out.append(f'<rect x="{_f(x0)}" y="{_f(-y1)}" width="{_f(w)}" height="{_f(h)}" '
                   'fill="none" stroke="#dddddd" stroke-width="0.02"/>')
        out.append(f'<line x1="{_f(x0)}" y1="0" x2="{_f(x1)}" y2="0" stroke="#eeeeee" stroke-width="0.015"/>')
        out.append(f'<line x1="0" y1="{_f(-y1)}" x2="0" y2="{_f(-y0)}" stroke="#eeeeee" stroke-width="0.015"/>')
        for a, b in st.paths:
            out.append(f'<line x1="{_f(a.real)}" y1="{_f(-a.imag)}" x2="{_f(b.real)}" y2="{_f(-b.imag)}" '
                       'stroke="black" stroke-width="0.025" marker-end="url(#arrow)"/>')
        out.extend(_glyph(m) for m in st.markers)
        out.append("</svg>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def node_diagram(spec: MethodSpec) -> str:
    return render(node_scene(spec))


def expansion_diagram(spec: MethodSpec) -> str:
    return render(expansion_scene(spec))


def polynomial_diagram(spec: MethodSpec) -> list:
    return [render(s) for s in polynomial_scenes(spec)]
