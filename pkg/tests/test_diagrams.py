import xml.etree.ElementTree as ET

import pytest
from hypothesis import given, settings, strategies as st

from oracles import method_grid
from polyblock.builder import active_index_sets, make_spec
from polyblock.diagrams import (
    ACTIVE, MarkerClass, expansion_diagram, expansion_scene, node_diagram, node_scene, polynomial_diagram,
    polynomial_scenes, render, scene_index_sets,
)
from polyblock.errors import ConfigurationError

SVG = "{http://www.w3.org/2000/svg}"
SPECS = list(method_grid(qs=(2, 3, 4, 5), alphas=(0.5,), node_families=("equispaced",)))


def parse(svg):
    return ET.fromstring(svg.split("\n", 1)[1])


def active(stencil):
    return {m.position for m in stencil.markers if m.cls in ACTIVE}


def of(stencil, cls):
    return {m.position for m in stencil.markers if m.cls is cls}


def test_pmfc_q2_node_diagram():
    spec = make_spec("bdf", "pmfc", 2, 0.5, ordering="classical")
    scene = node_scene(spec)
    assert len(scene.stencils) == 2
    z = spec.nodes.values
    for j, st_ in enumerate(scene.stencils):
        assert active(st_) == {z[0], z[1], z[j] + 0.5}
        assert of(st_, MarkerClass.EVALUATION) == {z[j] + 0.5}


def test_pmfcmj_q4_first_stencil():
    spec = make_spec("adams", "pmfcmj", 4, 0.5, ordering="classical", endpoint="vi")
    st1 = node_scene(spec).stencils[0]
    assert spec.nodes.values[0] in of(st1, MarkerClass.INACTIVE)


def test_svg_deterministic_and_well_formed():
    spec = make_spec("bdf", "smfc", 4, 0.5)
    a, b = node_diagram(spec), node_diagram(spec)
    assert a == b
    root = parse(a)
    inner = root.findall(f"{SVG}svg")
    assert len(inner) == 4
    assert inner[0].get("viewBox") == "-1.5 -1.5 3.5 3"


def test_vi_expansion_paths():
    spec = make_spec("adams", "pmfc", 4, 0.5, ordering="classical", endpoint="vi")
    z = spec.nodes.values
    for j, st_ in enumerate(expansion_scene(spec).stencils):
        assert st_.paths == [(z[j], z[j] + 0.5)]
        assert of(st_, MarkerClass.EXPANSION) == {z[j]}


def test_fi3_q5_paths_start_at_zero():
    spec = make_spec("adams", "pmfc", 5, 0.5, ordering="classical", endpoint="fi3")
    for st_ in expansion_scene(spec).stencils:
        assert st_.paths[0][0] == 0


def test_sweeping_q4_paths():
    spec = make_spec("adams", "smvc", 4, 0.5, endpoint="sweeping")
    z = spec.nodes.values
    stencils = expansion_scene(spec).stencils
    assert stencils[2].paths[0][0] == z[0] + 0.5
    assert stencils[3].paths[0][0] == z[1] + 0.5


def test_expansion_needs_adams():
    with pytest.raises(ConfigurationError):
        expansion_diagram(make_spec("bdf", "pmfc", 2, 0.5))


def test_bbdf_polynomial_diagram():
    spec = make_spec("bdf", "pmfc", 2, 0.5, ordering="classical")
    scenes = polynomial_scenes(spec)
    assert len(scenes) == 1
    z = spec.nodes.values
    for j, st_ in enumerate(scenes[0].stencils):
        assert of(st_, MarkerClass.VALUE) == {z[0], z[1]}
        assert of(st_, MarkerClass.DERIVATIVE) == {z[j] + 0.5}


def test_bam_polynomial_diagram():
    spec = make_spec("adams", "pmfc", 2, 0.5, ordering="classical", endpoint="vi")
    ly, lf = polynomial_scenes(spec)
    z = spec.nodes.values
    for j in range(2):
        assert of(ly.stencils[j], MarkerClass.VALUE) == {z[j]}
        assert of(lf.stencils[j], MarkerClass.DERIVATIVE) == {z[0], z[1], z[j] + 0.5}
    assert len(polynomial_diagram(spec)) == 2


def test_explicit_gbdf_interpolated_marker():
    spec = make_spec("gbdf", "smvc", 3, 0.5, implicitness="explicit")
    z = spec.nodes.values
    for j, st_ in enumerate(polynomial_scenes(spec)[0].stencils):
        assert of(st_, MarkerClass.INTERPOLATED) == {z[j] + 0.5}


def test_extent_check():
    spec = make_spec("bdf", "pmfc", 2, 0.5)
    scene = node_scene(spec)
    from polyblock.diagrams import Marker
    scene.stencils[0].markers.append(Marker(5 + 0j, MarkerClass.VALUE))
    with pytest.raises(ValueError):
        render(scene)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(SPECS))
def test_scene_round_trip(spec):
    sets = active_index_sets(spec.strategy, spec.q, spec.nodes.ordering, spec.implicitness)
    got = scene_index_sets(node_scene(spec), spec)
    assert got == list(zip(sets.I, sets.O))
    for svg in [node_diagram(spec)] + polynomial_diagram(spec):
        parse(svg)
