import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import coherent_vector, fock_vector, ladder_ops, to_fock_coeffs
from dwimaging.hilbert import (CoherentParams, TwoModeState, coherent_gram, coherent_state,
                               fock_state, one_body_matrix, overlap, povm_weight,
                               povm_weight_grid)
from dwimaging.imaging import povm_moments
from dwimaging.numerics import gauss_legendre

params_st = st.builds(CoherentParams, st.floats(0, 1), st.floats(0, 2 * math.pi, exclude_max=True))


def random_state(rng, N):
    return TwoModeState.from_vector(rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1))


def test_fock_state():
    np.testing.assert_array_equal(fock_state(2, 1).coeffs, [0, 1, 0])
    np.testing.assert_array_equal(fock_state(0, 0).coeffs, [1])
    with pytest.raises(ValueError):
        fock_state(3, 4)


def test_state_validation():
    with pytest.raises(ValueError):
        TwoModeState(2, np.array([1.0, 1.0, 0.0]))
    with pytest.raises(ValueError):
        TwoModeState(2, np.array([1.0, 0.0]))


def test_params_phase_reduced():
    assert CoherentParams(0.3, 2 * math.pi + 0.25).phi == pytest.approx(0.25)
    with pytest.raises(ValueError):
        CoherentParams(1.5, 0.0)


def test_coherent_state_examples():
    c = coherent_state(2, CoherentParams(0.5, 0.0)).coeffs
    np.testing.assert_allclose(c, [0.5, math.sqrt(2) / 2, 0.5], atol=1e-15)
    c = coherent_state(5, CoherentParams(1.0, 1.3)).coeffs
    np.testing.assert_allclose(np.abs(c), [0, 0, 0, 0, 0, 1], atol=1e-15)


@pytest.mark.parametrize("N", [0, 1, 2, 3, 4])
@pytest.mark.parametrize("xi,phi", [(0.5, 0.0), (0.2, 1.1), (0.9, 4.0), (0.0, 0.3), (1.0, 2.0)])
def test_coherent_state_matches_creation_operators(N, xi, phi):
    expected = to_fock_coeffs(coherent_vector(N, xi, phi), N)
    np.testing.assert_allclose(coherent_state(N, CoherentParams(xi, phi)).coeffs, expected, atol=1e-12)


@pytest.mark.parametrize("N,xi", [(4, 0.3), (10, 0.8), (31, 0.5)])
def test_relative_occupation_convention(N, xi):
    # well 1 carries weight xi: <n1 - n2> = N (2 xi - 1)
    obm = one_body_matrix(coherent_state(N, CoherentParams(xi, 0.7)))
    assert obm.n1 - obm.n2 == pytest.approx(N * (2 * xi - 1), abs=1e-10)


def test_overlap_basics():
    rng = np.random.default_rng(0)
    s = random_state(rng, 6)
    assert overlap(s, s) == pytest.approx(1.0, abs=1e-12)
    assert overlap(fock_state(4, 1), fock_state(4, 3)) == 0
    with pytest.raises(ValueError):
        overlap(fock_state(3, 1), fock_state(4, 1))


@settings(max_examples=40)
@given(st.integers(0, 60), params_st, st.data())
def test_overlap_with_fock_closed_form(N, p, data):
    k = data.draw(st.integers(0, N))
    got = overlap(coherent_state(N, p), fock_state(N, k))
    # closed form <N;xi,phi|N;k>, with 0^0 = 1
    mag = math.sqrt(math.comb(N, k)) * (p.xi ** (k / 2) if k else 1.0) * (
        (1 - p.xi) ** ((N - k) / 2) if N - k else 1.0)
    expected = mag * complex(math.cos(p.phi * (k - N / 2)), -math.sin(p.phi * (k - N / 2)))
    assert abs(got - expected) <= 1e-12


@settings(max_examples=40)
@given(st.integers(1, 12))
def test_overlap_conjugate_symmetry(N):
    rng = np.random.default_rng(N)
    a, b = random_state(rng, N), random_state(rng, N)
    assert overlap(a, b) == pytest.approx(overlap(b, a).conjugate(), abs=1e-14)


def test_povm_weight_fock_examples():
    for xi in (0.0, 0.3, 1.0):
        assert povm_weight(fock_state(1, 0), CoherentParams(xi, 2.0)) == pytest.approx((1 - xi) / math.pi)
    N, k, xi = 12, 5, 0.37
    expected = (N + 1) / (2 * math.pi) * math.comb(N, k) * xi ** k * (1 - xi) ** (N - k)
    for phi in (0.0, 1.0, 5.5):
        assert povm_weight(fock_state(N, k), CoherentParams(xi, phi)) == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize("N", [1, 5, 20, 30])
def test_completeness_random_states(N):
    rng = np.random.default_rng(100 + N)
    for _ in range(50):
        total, _, _ = povm_moments(random_state(rng, N))
        assert abs(total - 1.0) <= 1e-8


@pytest.mark.parametrize("N", [1, 4, 10])
def test_fock_resolution_of_identity(N):
    qx = gauss_legendre(N + 4, 0, 1)
    qp = gauss_legendre(2 * N + 8, 0, 2 * math.pi)
    xi, phi = np.meshgrid(qx.nodes, qp.nodes, indexing="ij")
    w = np.outer(qx.weights, qp.weights)
    for k in range(N + 1):
        rebuilt = np.zeros(N + 1, dtype=complex)
        for x, p, ww in zip(xi.ravel(), phi.ravel(), w.ravel()):
            coh = coherent_state(N, CoherentParams(x, p))
            rebuilt += ww * (N + 1) / (2 * math.pi) * overlap(coh, fock_state(N, k)) * coh.coeffs
        np.testing.assert_allclose(rebuilt, fock_state(N, k).coeffs, atol=1e-6)


def test_povm_weight_grid_matches_scalar():
    rng = np.random.default_rng(5)
    s = random_state(rng, 7)
    xi, phi = np.array([0.1, 0.5, 0.93]), np.array([0.0, 2.2])
    g = povm_weight_grid(s, xi, phi)
    for i, x in enumerate(xi):
        for j, p in enumerate(phi):
            assert g[i, j] == pytest.approx(povm_weight(s, CoherentParams(x, p)), rel=1e-13)


def test_one_body_examples():
    obm = one_body_matrix(fock_state(7, 3))
    assert (obm.n1, obm.n2, obm.coh) == (3.0, 4.0, 0j)
    obm = one_body_matrix(fock_state(0, 0))
    assert (obm.n1, obm.n2, obm.coh) == (0.0, 0.0, 0j)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
@pytest.mark.parametrize("xi,phi", [(0.5, 0.0), (0.25, 1.0), (0.8, 3.7)])
def test_one_body_against_ladder_operators(N, xi, phi):
    a1, a2 = ladder_ops(N)
    v = coherent_vector(N, xi, phi)
    coh_op = np.vdot(v, a1.T @ a2 @ v)
    obm = one_body_matrix(coherent_state(N, CoherentParams(xi, phi)))
    assert obm.coh == pytest.approx(coh_op, abs=1e-10)
    assert obm.coh == pytest.approx(N * math.sqrt(xi * (1 - xi)) * np.exp(-1j * phi), abs=1e-10)
    assert obm.n1 == pytest.approx(N * xi, abs=1e-10)
    assert obm.n2 == pytest.approx(N * (1 - xi), abs=1e-10)


@settings(max_examples=50)
@given(st.integers(0, 40), st.integers(0, 2 ** 32))
def test_one_body_invariants(N, seed):
    s = random_state(np.random.default_rng(seed), N)
    obm = one_body_matrix(s)
    assert obm.n1 >= 0 and obm.n2 >= 0
    assert abs(obm.n1 + obm.n2 - N) <= 1e-9
    assert abs(obm.coh) ** 2 <= obm.n1 * obm.n2 + 1e-9


def test_gram_examples():
    p = CoherentParams(0.3, 1.2)
    assert coherent_gram(17, p, p) == pytest.approx(1.0, abs=1e-14)
    for N in (1, 2, 7, 50):
        assert abs(coherent_gram(N, CoherentParams(0.5, 0.4), CoherentParams(0.5, 0.4 + math.pi))) < 1e-15


def test_gram_decays_with_N():
    p, q = CoherentParams(0.5, 0.0), CoherentParams(0.6, 0.3)
    mags = [abs(coherent_gram(N, p, q)) for N in range(1, 501)]
    assert all(b < a for a, b in zip(mags, mags[1:]))
    # |base|^2 = 0.5 + 2 sqrt(0.06) cos(0.3)
    base2 = 0.5 + 2 * math.sqrt(0.06) * math.cos(0.3)
    assert mags[199] == pytest.approx(base2 ** 100, rel=1e-12)
    assert mags[199] == pytest.approx(0.038754, rel=1e-4)
    assert mags[424] > 1e-3 > mags[425]  # N = 425, 426


@settings(max_examples=40)
@given(st.integers(0, 80), params_st, params_st)
def test_gram_matches_vector_overlap(N, p, q):
    direct = overlap(coherent_state(N, p), coherent_state(N, q))
    assert abs(direct - coherent_gram(N, p, q)) <= 1e-10


def test_fock_vector_oracle_is_orthonormal():
    N = 3
    g = np.array([[np.vdot(fock_vector(N, i), fock_vector(N, j)) for j in range(N + 1)]
                  for i in range(N + 1)])
    np.testing.assert_allclose(g, np.eye(N + 1), atol=1e-14)
