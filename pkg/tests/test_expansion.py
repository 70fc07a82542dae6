import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import free_propagate
from dwimaging.diagnostics import measured_fringe_period, peak_positions
from dwimaging.expansion import (DensityProfile, SpatialGrid, WavepacketFamily, fringe_period,
                                 mode_function, operator_density, shot_density)
from dwimaging.hilbert import CoherentParams, TwoModeState, coherent_state, fock_state

FAM = WavepacketFamily(d=12.0, sigma=1.0)
GRID = SpatialGrid()
T = 30.0


def wide_grid(fam, t, n_widths=8.0, n=8001):
    half = 0.5 * fam.d + n_widths * fam.width(t)
    return SpatialGrid(-half, half, n)


def test_mode_peak():
    for j in (1, 2):
        assert mode_function(FAM, j, FAM.center(j), 0.0) == pytest.approx((2 * math.pi) ** -0.25)
    with pytest.raises(ValueError):
        mode_function(FAM, 3, 0.0, 0.0)


@pytest.mark.parametrize("t", [0.0, 1.0, 10.0, 30.0])
@pytest.mark.parametrize("j", [1, 2])
def test_mode_norm(t, j):
    g = wide_grid(FAM, t)
    w = mode_function(FAM, j, g.x, t)
    assert abs(np.trapezoid(np.abs(w) ** 2, g.x) - 1) <= 1e-8


@pytest.mark.parametrize("t", [0.5, 3.0, 30.0])
def test_mode_width_half_max(t):
    g = SpatialGrid(-150, 150, 60001)
    p = np.abs(mode_function(FAM, 1, g.x, t)) ** 2
    above = g.x[p >= 0.5 * p.max()]
    fwhm = above[-1] - above[0]
    expected = 2 * math.sqrt(2 * math.log(2)) * FAM.sigma * math.sqrt(1 + FAM.tau(t) ** 2)
    assert abs(fwhm - expected) <= 2 * g.spacing


@pytest.mark.parametrize("t", [2.0, 15.0])
def test_mode_matches_fft_propagator(t):
    # independent route: propagate the t=0 Gaussian with the exact free kernel in k-space
    g = SpatialGrid(-200, 200, 2 ** 14)
    x = g.x
    psi0 = mode_function(FAM, 2, x, 0.0)
    ref = free_propagate(psi0, x, t)
    np.testing.assert_allclose(mode_function(FAM, 2, x, t), ref, atol=1e-9)


def test_shot_density_no_fringes_at_endpoint():
    prof = shot_density(FAM, 50, CoherentParams(1.0, 2.0), T, GRID)
    np.testing.assert_allclose(prof.values, 50 * np.abs(mode_function(FAM, 1, GRID.x, T)) ** 2, rtol=1e-14)


@pytest.mark.parametrize("t", [0.0, 3.0, 30.0, 200.0])
def test_destructive_interference_at_center(t):
    g = SpatialGrid(-1.0, 1.0, 3)
    prof = shot_density(FAM, 40, CoherentParams(0.5, math.pi), t, g)
    assert prof.values[1] <= 1e-12 * 40


@settings(max_examples=25, deadline=None)
@given(st.floats(0, 1), st.floats(0, 2 * math.pi), st.sampled_from([0.0, 5.0, 30.0]))
def test_shot_density_integrates_to_N(xi, phi, t):
    N = 60
    prof = shot_density(FAM, N, CoherentParams(xi, phi), t, wide_grid(FAM, t))
    assert abs(prof.integral() - N) <= 1e-6 * N
    assert np.all(prof.values >= 0)


def test_default_grid_conserves_atoms():
    prof = shot_density(FAM, 200, CoherentParams(0.5, 1.0), T, GRID)
    assert abs(prof.integral() - 200) <= 1e-6 * 200


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 30), st.floats(0, 1), st.floats(0, 2 * math.pi))
def test_operator_density_equals_shot_on_coherent(N, xi, phi):
    p = CoherentParams(xi, phi)
    a = operator_density(FAM, coherent_state(N, p), T, GRID).values
    b = shot_density(FAM, N, p, T, GRID).values
    assert np.max(np.abs(a - b)) <= 1e-10 * max(N, 1)


def test_operator_density_fock_and_vacuum():
    N, k = 10, 3
    a = operator_density(FAM, fock_state(N, k), T, GRID).values
    p1 = np.abs(mode_function(FAM, 1, GRID.x, T)) ** 2
    p2 = np.abs(mode_function(FAM, 2, GRID.x, T)) ** 2
    np.testing.assert_allclose(a, k * p1 + (N - k) * p2, rtol=1e-14, atol=1e-300)
    assert np.all(operator_density(FAM, TwoModeState(0, np.array([1.0])), T, GRID).values == 0)


def test_fringe_period_examples():
    fam = WavepacketFamily(d=12.0, sigma=1.0)
    for t in (20.0, 50.0, 400.0):
        assert fam.tau(t) >= 10
        assert fringe_period(fam, t) == pytest.approx(2 * math.pi * t / fam.d, rel=0.01)
    wide = WavepacketFamily(d=24.0, sigma=1.0)
    assert fringe_period(wide, 30.0) == pytest.approx(0.5 * fringe_period(fam, 30.0), rel=1e-14)
    with pytest.raises(ValueError):
        fringe_period(fam, 0.0)


@pytest.mark.parametrize("t", [5.0, 10.0, 30.0])
def test_fringe_period_measured(t):
    assert abs(measured_fringe_period(FAM, t, GRID) - fringe_period(FAM, t)) <= GRID.spacing


def test_phase_shift_swaps_maxima_and_minima():
    half = FAM.width(T)
    period = fringe_period(FAM, T)
    a = shot_density(FAM, 100, CoherentParams(0.5, 0.4), T, GRID)
    b = shot_density(FAM, 100, CoherentParams(0.5, 0.4 + math.pi), T, GRID)
    minima_b = peak_positions(DensityProfile(GRID, -b.values, T, 0.0), -2 * half, 2 * half)
    x = GRID.x
    peaks = peak_positions(a, -half, half)
    assert peaks.size >= 2
    for xp in peaks:
        # the envelope displaces extrema slightly; they stay within a tenth of a period
        assert np.min(np.abs(minima_b - xp)) <= 0.1 * period
        i = int(np.argmin(np.abs(x - xp)))
        assert b.values[i] < a.values[i]


@pytest.mark.parametrize("t", [0.0, 4.0, 30.0])
def test_single_mode_variance_growth(t):
    g = wide_grid(FAM, t)
    prof = shot_density(FAM, 1, CoherentParams(1.0, 0.0), t, g)
    x, n = g.x, prof.values
    mean = np.trapezoid(x * n, x)
    var = np.trapezoid((x - mean) ** 2 * n, x)
    assert var == pytest.approx(FAM.sigma ** 2 * (1 + FAM.tau(t) ** 2), rel=0.01)


def test_profile_csv_format():
    g = SpatialGrid(-1.0, 1.0, 3)
    prof = DensityProfile(g, np.array([0.1, 1 / 3, 0.0]), 1.0, 1.0)
    text = prof.to_csv()
    assert text == "x,density\n-1,0.10000000000000001\n0,0.33333333333333331\n1,0\n"
    assert "\r" not in text


def test_family_and_grid_validation():
    with pytest.raises(ValueError):
        WavepacketFamily(sigma=0.0)
    with pytest.raises(ValueError):
        SpatialGrid(1.0, 0.0, 10)
    with pytest.raises(ValueError):
        SpatialGrid(0.0, 1.0, 1)
