import numpy as np
import pytest
from hypothesis import given, strategies as st

from polyblock.errors import ConfigurationError, InvalidOrderError, StructuralError, UnsupportedOrderingError
from polyblock.nodes import NodeSet, chi, conjugate_pairing, custom_nodes, generate_nodes

I = 1j


def close(a, b, tol=1e-14):
    return np.allclose(np.array(a, dtype=complex), np.array(b, dtype=complex), atol=tol, rtol=0)


def test_equispaced_q4_classical():
    assert close(generate_nodes("equispaced", 4, "classical").values, [I, I / 3, -I / 3, -I])


def test_chebyshev_q3_classical():
    assert close(generate_nodes("chebyshev", 3, "classical").values, [I, 0, -I])


def test_equispaced_q5_inward():
    assert close(generate_nodes("equispaced", 5, "inward").values, [I, -I, I / 2, -I / 2, 0])


def test_outward_puts_small_nodes_first():
    assert close(generate_nodes("equispaced", 5, "outward").values, [0, I / 2, -I / 2, I, -I])


def test_generate_rejects_bad_input():
    with pytest.raises(InvalidOrderError):
        generate_nodes("equispaced", 1)
    with pytest.raises(ConfigurationError):
        generate_nodes("legendre", 4)


@pytest.mark.parametrize("args,expected", [
    (("in", 4, 4, "inward"), 3),
    (("in", 1, 5, "inward"), 1),
    (("in", 3, 5, "outward"), 2),
])
def test_chi_examples(args, expected):
    assert chi(*args) == expected


def test_chi_classical_is_unsupported():
    with pytest.raises(UnsupportedOrderingError):
        chi("in", 1, 4, "classical")


def test_pairing_examples():
    p = conjugate_pairing(generate_nodes("equispaced", 4, "classical"))
    assert set(p.pairs) == {(1, 4), (2, 3)} and p.self_conjugate == ()
    p = conjugate_pairing(custom_nodes([I, -I, 0], "inward"))
    assert set(p.pairs) == {(1, 2)} and p.self_conjugate == (3,)
    p = conjugate_pairing(generate_nodes("equispaced", 5, "inward"))
    assert set(p.pairs) == {(1, 2), (3, 4)} and p.self_conjugate == (5,)


def test_custom_nodes_validate_symmetry():
    with pytest.raises(StructuralError):
        custom_nodes([I, -0.5j])
    with pytest.raises(StructuralError):
        custom_nodes([1 + I, 1 - I])


def test_nodeset_json_round_trip():
    ns = generate_nodes("chebyshev", 6, "outward")
    assert NodeSet.from_json(ns.to_json()) == ns


families = st.sampled_from(["equispaced", "chebyshev"])
orderings = st.sampled_from(["classical", "inward", "outward"])


@given(families, st.integers(2, 12), orderings)
def test_nodeset_invariants(family, q, ordering):
    ns = generate_nodes(family, q, ordering)
    z = ns.array
    assert np.all(np.abs(z.real) <= 1e-14)
    for zk in z:
        assert np.min(np.abs(z - np.conj(zk))) <= 1e-14
    assert len({complex(v) for v in z}) == q
    mags = np.abs(z.imag)
    if ordering == "classical":
        assert np.all(np.diff(z.imag) < 0)
    elif ordering == "inward":
        assert np.all(np.diff(mags) <= 1e-15)
    else:
        assert np.all(np.diff(mags) >= -1e-15)
    pairing = conjugate_pairing(ns)
    seen = [j for pair in pairing.pairs for j in pair] + list(pairing.self_conjugate)
    assert sorted(seen) == list(range(1, q + 1))
    for a, b in pairing.pairs:
        assert abs(z[a - 1] - np.conj(z[b - 1])) <= 1e-14


@given(families, st.integers(2, 12))
def test_orderings_are_permutations(family, q):
    sets = [sorted(generate_nodes(family, q, o).values, key=lambda v: v.imag)
            for o in ("classical", "inward", "outward")]
    assert sets[0] == sets[1] == sets[2]


@given(st.integers(2, 12), st.sampled_from(["inward", "outward"]), st.data())
def test_chi_ranges(q, ordering, data):
    j = data.draw(st.integers(1, q))
    cin, cout = chi("in", j, q, ordering), chi("out", j, q, ordering)
    assert 1 <= cin <= q and 1 <= cout <= q
    if ordering == "inward":
        assert cin <= j and cout <= 2
