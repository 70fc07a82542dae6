"""Free expansion of the two well modes after release and the resulting
density profiles on a 1-D grid (hbar = m = 1).

Each well mode is a normalized Gaussian of width sigma centered at +d/2 (well 1)
or -d/2 (well 2), evolved with the exact free-particle propagator.
"""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .hilbert import CoherentParams, TwoModeState, one_body_matrix


@dataclass(frozen=True)
class WavepacketFamily:
    d: float = 12.0
    sigma: float = 1.0

    def __post_init__(self):
        if not self.d >= 0:
            raise ValueError(f"well separation must be >= 0, got {self.d}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be > 0, got {self.sigma}")

    def center(self, j: int) -> float:
        if j == 1:
            return 0.5 * self.d
        if j == 2:
            return -0.5 * self.d
        raise ValueError(f"well index must be 1 or 2, got {j}")

    def tau(self, t: float) -> float:
        return t / (2.0 * self.sigma ** 2)

    def width(self, t: float) -> float:
        """Standard deviation of |W_j(x,t)|^2."""
        return self.sigma * math.sqrt(1.0 + self.tau(t) ** 2)


@dataclass(frozen=True)
class SpatialGrid:
    x_min: float = -100.0
    x_max: float = 100.0
    n_points: int = 5001

    def __post_init__(self):
        if not self.x_min < self.x_max:
            raise ValueError("grid needs x_min < x_max")
        if self.n_points < 2:
            raise ValueError("grid needs at least 2 points")

    @property
    def spacing(self) -> float:
        return (self.x_max - self.x_min) / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass
class DensityProfile:
    grid: SpatialGrid
    values: np.ndarray
    t: float
    atom_total: float
    source: str = ""
    stderr: np.ndarray | None = field(default=None, repr=False)

    def integral(self) -> float:
        return float(np.trapezoid(self.values, self.grid.x))

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = ["x", "density"] + (["stderr"] if self.stderr is not None else [])
        buf.write(",".join(cols) + "\n")
        rows = [self.grid.x, self.values] + ([self.stderr] if self.stderr is not None else [])
        for r in zip(*rows):
            buf.write(",".join(format_float(v) for v in r) + "\n")
        return buf.getvalue()


def format_float(v: float) -> str:
    return format(float(v), ".17g")


def mode_function(family: WavepacketFamily, j: int, x, t: float):
    """W_j(x, t), vectorized over x."""
    if t < 0:
        raise ValueError("flight time must be >= 0")
    s2 = family.sigma ** 2
    z = 1.0 + 1j * family.tau(t)
    x = np.asarray(x, dtype=float)
    w = (2.0 * math.pi * s2) ** -0.25 / np.sqrt(z) * np.exp(
        -((x - family.center(j)) ** 2) / (4.0 * s2 * z))
    return w if w.ndim else complex(w)


@dataclass(frozen=True)
class ModeTerms:
    """|W1|^2, |W2|^2 and W1 conj(W2) sampled on a grid."""

    p1: np.ndarray
    p2: np.ndarray
    cross: np.ndarray


def mode_terms(family: WavepacketFamily, t: float, grid: SpatialGrid) -> ModeTerms:
    x = grid.x
    w1 = mode_function(family, 1, x, t)
    w2 = mode_function(family, 2, x, t)
    return ModeTerms(np.abs(w1) ** 2, np.abs(w2) ** 2, w1 * np.conj(w2))


def pattern(terms: ModeTerms, N: float, pop1, coh):
    """N-atom density for well-1 fraction `pop1` and coherence amplitude `coh`.

    Returns N [pop1 |W1|^2 + (1-pop1) |W2|^2 + 2 Re(coh W1 conj(W2))]; with
    pop1 = xi and coh = sqrt(xi (1-xi)) e^{i phi} this is the density of the
    phase state |N;xi,phi>. Array-valued pop1/coh give one row per entry.
    """
    pop1 = np.asarray(pop1, dtype=float)[..., None]
    coh = np.asarray(coh, dtype=complex)[..., None]
    return N * (pop1 * terms.p1 + (1.0 - pop1) * terms.p2
                + 2.0 * (coh.real * terms.cross.real - coh.imag * terms.cross.imag))


def shot_amplitudes(xi, phi):
    xi = np.asarray(xi, dtype=float)
    return xi, np.sqrt(xi * (1.0 - xi)) * np.exp(1j * np.asarray(phi, dtype=float))


def shot_density(family: WavepacketFamily, N: int, params: CoherentParams, t: float,
                 grid: SpatialGrid) -> DensityProfile:
    """Density of a single image projected onto |N;xi,phi> at flight time t."""
    pop1, coh = shot_amplitudes(params.xi, params.phi)
    n = pattern(mode_terms(family, t, grid), N, pop1, coh)
    return DensityProfile(grid, np.maximum(n, 0.0), t, float(N), source="shot")


def operator_density(family: WavepacketFamily, state: TwoModeState, t: float,
                     grid: SpatialGrid) -> DensityProfile:
    """Expectation value of the density operator in the released state."""
    obm = one_body_matrix(state)
    terms = mode_terms(family, t, grid)
    # <a1^dag a2> multiplies conj(W1) W2 = conj(W1 conj(W2))
    n = (obm.n1 * terms.p1 + obm.n2 * terms.p2
         + 2.0 * (obm.coh.real * terms.cross.real + obm.coh.imag * terms.cross.imag))
    return DensityProfile(grid, np.maximum(n, 0.0), t, float(state.N), source="operator")


def fringe_period(family: WavepacketFamily, t: float) -> float:
    """Spatial period of Re(W1 conj(W2) e^{i phi}) at flight time t."""
    if t <= 0:
        raise ValueError("fringe period is undefined for t <= 0")
    if family.d == 0:
        return math.inf
    tau = family.tau(t)
    return 4.0 * math.pi * family.sigma ** 2 * (1.0 + tau ** 2) / (tau * family.d)
