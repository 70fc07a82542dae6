"""Fringe and sampling diagnostics shared by the CLI, selftest and tests."""
from __future__ import annotations

import numpy as np
from scipy import stats

from .expansion import DensityProfile, SpatialGrid, WavepacketFamily, shot_density
from .hilbert import CoherentParams


def fringe_window(family: WavepacketFamily, t: float, n_widths: float = 2.0) -> float:
    """Half-width of the central region where both clouds overlap."""
    return n_widths * family.width(t)


def measured_fringe_period(family: WavepacketFamily, t: float, grid: SpatialGrid,
                           n_widths: float = 2.0) -> float:
    """Fringe period read off a simulated profile.

    The difference of the xi = 1/2 images at phi = 0 and phi = pi isolates the
    interference term; its zero crossings (linearly interpolated) are half a
    period apart, free of the envelope shift that biases peak positions.
    """
    a = shot_density(family, 2, CoherentParams(0.5, 0.0), t, grid).values
    b = shot_density(family, 2, CoherentParams(0.5, np.pi), t, grid).values
    x = grid.x
    sel = np.abs(x) <= fringe_window(family, t, n_widths)
    x, f = x[sel], (a - b)[sel]
    idx = np.nonzero(np.signbit(f[:-1]) != np.signbit(f[1:]))[0]
    if idx.size < 2:
        raise ValueError("fewer than two zero crossings in the fringe window")
    roots = x[idx] - f[idx] * (x[idx + 1] - x[idx]) / (f[idx + 1] - f[idx])
    return 2.0 * float(np.mean(np.diff(roots)))


def peak_positions(profile: DensityProfile, lo: float, hi: float) -> np.ndarray:
    x, v = profile.grid.x, profile.values
    inner = (v[1:-1] > v[:-2]) & (v[1:-1] >= v[2:])
    xs = x[1:-1][inner]
    return xs[(xs >= lo) & (xs <= hi)]


def fringe_contrast(profile: DensityProfile, half_window: float, center: float = 0.0) -> float:
    """(max - min) / (max + min) over |x - center| <= half_window."""
    x, v = profile.grid.x, profile.values
    sel = np.abs(x - center) <= half_window
    hi, lo = v[sel].max(), v[sel].min()
    return float((hi - lo) / (hi + lo)) if hi + lo > 0 else 0.0


def ks_beta(samples, a: float, b: float) -> float:
    return float(stats.kstest(np.asarray(samples), "beta", args=(a, b)).statistic)


def uniform_phase_pvalue(phi, bins: int = 32) -> float:
    counts, _ = np.histogram(np.asarray(phi), bins=bins, range=(0.0, 2.0 * np.pi))
    return float(stats.chisquare(counts).pvalue)


def l2_distance(a: DensityProfile, b: DensityProfile) -> float:
    return float(np.sqrt(np.trapezoid((a.values - b.values) ** 2, a.grid.x)))


def relative_atom_error(profile: DensityProfile) -> float:
    return abs(profile.integral() - profile.atom_total) / max(profile.atom_total, 1.0)
