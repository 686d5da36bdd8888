import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oracles import bbdf_oracle, buildable, method_grid, trapezoid_block
from polyblock.bench import classical_bdf
from polyblock.builder import build_method, make_spec
from polyblock.errors import AmplificationPoleError
from polyblock.roots import aberth, charpoly, eigvals
from polyblock.stability import (
    alpha_sweep, amplification_at, amplification_matrix, is_root_stable, limit_matrix, limit_stable,
    region_grid, root_stable_at, stability_angle,
)

SMVC2 = make_spec("bdf", "smvc", 2, 0.75)
SAMPLE = [s for s in method_grid(qs=(2, 3, 4), alphas=(0.5,), node_families=("chebyshev",),
                                 implicitness=("diagonally_implicit",), adams_endpoint="vi")
          if buildable(s) is not None]


def test_zero_zeta_reproduces_constants():
    for spec in SAMPLE:
        M = amplification_matrix(build_method(spec), 0.0)
        assert np.allclose(M @ np.ones(spec.q), np.ones(spec.q), atol=1e-12)


def test_limit_matrix_is_large_zeta_limit():
    m = build_method(make_spec("bdf", "smfc", 4, 0.5))
    L = limit_matrix(m)
    assert np.allclose(L, -np.linalg.solve(m.D, m.B))
    assert np.allclose(amplification_matrix(m, -1e9), L, atol=1e-6)


def test_limit_requires_nonsingular_d():
    m = build_method(make_spec("bdf", "smfc", 4, 0.5, implicitness="explicit"))
    with pytest.raises(AmplificationPoleError):
        limit_matrix(m)


def test_bbdf_amplification_by_hand():
    alpha = 0.5
    A, D = bbdf_oracle(alpha)
    zr = -1 / alpha
    # (I - zr D) M = A with D diagonal
    M = A / (1 - zr * np.diag(D))[:, None]
    m = build_method(make_spec("bdf", "pmfc", 2, alpha, ordering="classical"))
    assert np.allclose(amplification_at(m, -1.0), M, atol=1e-13)


def test_root_stability_examples():
    assert is_root_stable(0.5 * np.eye(3))
    assert not is_root_stable(np.array([[1, 1], [0, 1]]))
    assert is_root_stable(np.diag([1, 0.3]))
    assert is_root_stable(np.eye(2))  # semisimple double root
    assert not is_root_stable(np.diag([1.01, 0.2]))
    assert not is_root_stable(np.array([[np.nan, 0], [0, 0]]))


def test_aberth_matches_lapack():
    rng = np.random.default_rng(3)
    for q in range(1, 9):
        for _ in range(10):
            M = rng.normal(size=(q, q)) + 1j * rng.normal(size=(q, q))
            a = np.sort_complex(eigvals(M, "aberth"))
            b = np.sort_complex(eigvals(M, "lapack"))
            assert np.allclose(a, b, atol=1e-9 * max(1, np.abs(b).max()))
    # on method amplification matrices too
    for spec in SAMPLE[:20]:
        M = amplification_at(build_method(spec), -0.7 + 0.4j)
        a = np.sort(np.abs(eigvals(M, "aberth")))
        b = np.sort(np.abs(eigvals(M, "lapack")))
        assert np.allclose(a, b, atol=1e-8)


def test_charpoly_and_aberth_on_known_roots():
    roots = np.array([0.5, -0.25j, 1.0, 2 + 1j])
    coeffs = np.poly(roots)
    assert np.allclose(np.sort_complex(aberth(coeffs)), np.sort_complex(roots))
    assert np.allclose(charpoly(np.diag(roots)), coeffs)


def test_bdf_smvc_q2_is_a90():
    rep = stability_angle(SMVC2)
    assert rep.a90 and rep.angle_deg == 90.0 and rep.root_stable


def test_bdf6_angle():
    rep = stability_angle(classical_bdf(6).block_matrices())
    assert abs(rep.angle_deg - 17.8) <= 0.3


def test_trapezoid_boundary_case():
    m = trapezoid_block()
    assert np.isclose(np.max(np.abs(np.linalg.eigvals(limit_matrix(m)))), 1.0)
    assert limit_stable(m)
    assert stability_angle(m).a90


def test_alpha_sweep_single_point():
    sw = alpha_sweep(make_spec("bdf", "smfc", 3, 0.5), [0.4])
    assert len(sw.thetas) == 1
    assert all(iv == [0.4, 0.4] for iv in sw.root_stable_intervals)


def test_alpha_sweep_bdf_monotone():
    sw = alpha_sweep(make_spec("bdf", "smfc", 5, 0.5), np.linspace(0.1, 1.0, 6))
    assert sw.alphas == sorted(sw.alphas)
    assert all(b <= a + 1.0 for a, b in zip(sw.thetas, sw.thetas[1:]))
    for lo, hi in sw.root_stable_intervals:
        assert lo in sw.alphas and hi in sw.alphas
    assert sw.to_csv().splitlines()[0] == "alpha,theta_deg,root_stable"


def test_region_contains_origin():
    for spec in SAMPLE[:10]:
        g = region_grid(spec, (-2, 2), (-1, 1), 5, 3)
        assert g.stable[1, 2]


def test_region_left_half_plane_for_a90_method():
    g = region_grid(SMVC2, (-5, 1), (-3, 3), 25, 13)
    assert g.stable[:, g.re < 0].all()
    assert g.to_csv().splitlines()[0] == "zeta_re,zeta_im,stable"


def test_far_left_point_stable():
    for spec in (make_spec("bdf", "smfc", 4, 0.5), make_spec("gbdf", "pmfc", 3, 0.5, ordering="classical")):
        m = build_method(spec)
        assert np.max(np.abs(np.linalg.eigvals(limit_matrix(m)))) < 1
        g = region_grid(m, (-1e6, -1e6 + 1), (0, 1), 2, 2)
        assert g.stable[0, 0]


def test_region_needs_two_points():
    with pytest.raises(ValueError):
        region_grid(SMVC2, (-1, 0), (0, 1), 1, 5)


def test_angle_region_coherence():
    m = build_method(make_spec("bdf", "smfc", 6, 0.5))
    rep = stability_angle(m)
    assert 0 < rep.angle_deg < 90
    theta = np.radians(rep.angle_deg - 1)
    for rho in np.logspace(-3, 5, 30):
        z = -rho * np.exp(1j * theta)
        g = region_grid(m, (z.real, z.real + 1), (z.imag, z.imag + 1), 2, 2)
        assert g.stable[0, 0]


def test_m0_unit_eigenvalue():
    for spec in SAMPLE:
        M = amplification_matrix(build_method(spec), 0.0)
        ev = np.linalg.eigvals(M)
        if np.sum(np.abs(ev - 1) < 1e-6) != 1:
            # variable-input Adams methods copy every input: M(0) = I
            assert spec.endpoint is not None and spec.endpoint.kind.value == "vi"
            assert np.allclose(M, np.eye(spec.q), atol=1e-12)
            assert is_root_stable(M)


def test_root_stable_flag():
    assert root_stable_at(build_method(SMVC2))
    # Explicit methods blow up on the far negative real axis
    assert not root_stable_at(build_method(make_spec("bdf", "smfc", 3, 0.5, implicitness="explicit")))


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(SAMPLE), st.complex_numbers(max_magnitude=50, allow_nan=False, allow_infinity=False))
def test_conjugate_symmetric_verdicts(spec, zeta):
    m = build_method(spec)
    a = is_root_stable(amplification_at(m, zeta))
    b = is_root_stable(amplification_at(m, np.conj(zeta)))
    if a != b:
        # only tolerated right on the boundary
        rad = np.max(np.abs(np.linalg.eigvals(amplification_at(m, zeta))))
        assert abs(rad - 1) < 1e-7
