"""Absorption imaging as a phase-state POVM.

Each simulated image projects the released N-atom state onto a phase state
|N;xi,phi>, drawn with probability density povm_weight. Averaging many images
gives the POVM density, which is computed here three ways: Monte-Carlo over
shots, tensor-product Gauss-Legendre quadrature, and (for Fock states) in
closed form. The operator expectation value is provided for comparison.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from . import numerics
from .expansion import (DensityProfile, SpatialGrid, WavepacketFamily, mode_terms,
                        pattern, shot_amplitudes)
from .hilbert import TWO_PI, CoherentParams, TwoModeState, povm_weight_grid
from .numerics import RngStream, gauss_legendre

SAMPLERS = ("auto", "exact-beta", "grid-cdf")
# shots per accumulation block; fixed so results never depend on thread count
CHUNK = 256


class ConfigurationError(ValueError):
    pass


@dataclass
class RunConfig:
    n_shots: int = 1000
    master_seed: int = 0
    keep_profiles: bool = False
    grid: SpatialGrid = field(default_factory=SpatialGrid)
    t: float = 30.0
    sampler: str = "auto"
    sampler_resolution: tuple[int, int] = (512, 256)
    noise_sigma: float = 0.0

    def __post_init__(self):
        if self.n_shots < 1:
            raise ConfigurationError("n_shots must be >= 1")
        if self.sampler not in SAMPLERS:
            raise ConfigurationError(f"unknown sampler {self.sampler!r}; expected one of {SAMPLERS}")
        n_xi, n_phi = self.sampler_resolution
        if self.sampler == "grid-cdf" and (n_xi < 64 or n_phi < 64):
            raise ConfigurationError("grid-cdf resolution must be at least (64, 64)")
        if self.noise_sigma < 0:
            raise ConfigurationError("noise_sigma must be >= 0")


@dataclass
class ShotRecord:
    index: int
    params: CoherentParams
    profile: DensityProfile | None = None


def xi_marginal_fock(N: int, k: int, xi):
    """Density of xi for images of |N;k>: (N+1) C(N,k) xi^k (1-xi)^(N-k)."""
    if not 0 <= k <= N:
        raise ValueError(f"k={k} outside 0..{N}")
    xi = np.asarray(xi, dtype=float)
    with np.errstate(divide="ignore"):
        logp = (math.log(N + 1) + numerics.log_binomial(N, k)
                + special.xlogy(k, xi) + special.xlog1py(N - k, -xi))
    out = np.exp(logp)
    return out if out.ndim else float(out)


def xi_marginal(state: TwoModeState, xi, phi_order: int | None = None):
    """Density of xi for images of an arbitrary state (phi integrated out)."""
    n_phi = phi_order or default_orders(state)[1]
    qp = gauss_legendre(n_phi, 0.0, TWO_PI)
    return povm_weight_grid(state, np.atleast_1d(xi), qp.nodes) @ qp.weights


# --- sampling -------------------------------------------------------------

def _invert_linear(a, b, c):
    """s in [0,1] with a s + (b-a) s^2 / 2 = c, for the density a(1-s) + b s."""
    disc = np.sqrt(np.maximum(a * a + 2.0 * (b - a) * c, 0.0))
    den = a + disc
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.where(den > 0, 2.0 * c / den, 0.0)
    return np.clip(s, 0.0, 1.0)


class GridCdfSampler:
    """Inverse-CDF sampler for the bilinear interpolant of povm_weight on a
    regular (xi, phi) lattice. Works for any state."""

    def __init__(self, state: TwoModeState, n_xi: int = 512, n_phi: int = 256):
        self.xi_nodes = np.linspace(0.0, 1.0, n_xi + 1)
        self.phi_nodes = np.linspace(0.0, TWO_PI, n_phi + 1)
        self.h_xi = 1.0 / n_xi
        self.h_phi = TWO_PI / n_phi
        w = povm_weight_grid(state, self.xi_nodes, self.phi_nodes)
        self.w = w
        self.marg = self.h_phi * (w.sum(axis=1) - 0.5 * (w[:, 0] + w[:, -1]))
        cell = 0.5 * self.h_xi * (self.marg[:-1] + self.marg[1:])
        self.xi_cum = np.concatenate([[0.0], np.cumsum(cell)])

    def transform(self, u1, u2):
        u1 = np.asarray(u1, dtype=float)
        u2 = np.asarray(u2, dtype=float)
        n_cells = self.xi_nodes.size - 1
        target = u1 * self.xi_cum[-1]
        i = np.clip(np.searchsorted(self.xi_cum, target, side="right") - 1, 0, n_cells - 1)
        a, b = self.marg[i], self.marg[i + 1]
        s = _invert_linear(a, b, (target - self.xi_cum[i]) / self.h_xi)
        xi = self.xi_nodes[i] + s * self.h_xi

        rows = (1.0 - s)[:, None] * self.w[i] + s[:, None] * self.w[i + 1]
        cells = 0.5 * self.h_phi * (rows[:, :-1] + rows[:, 1:])
        cum = np.concatenate([np.zeros((rows.shape[0], 1)), np.cumsum(cells, axis=1)], axis=1)
        target = u2 * cum[:, -1]
        j = (cum[:, 1:-1] <= target[:, None]).sum(axis=1)
        r = np.arange(rows.shape[0])
        sp = _invert_linear(rows[r, j], rows[r, j + 1], (target - cum[r, j]) / self.h_phi)
        phi = self.phi_nodes[j] + sp * self.h_phi
        return np.clip(xi, 0.0, 1.0), np.mod(phi, TWO_PI)


class BetaSampler:
    """Exact sampler for a Fock state: xi ~ Beta(k+1, N-k+1), phi uniform."""

    def __init__(self, N: int, k: int):
        self.a, self.b = k + 1.0, N - k + 1.0

    def transform(self, u1, u2):
        xi = special.betaincinv(self.a, self.b, np.asarray(u1, dtype=float))
        return xi, TWO_PI * np.asarray(u2, dtype=float)


def make_sampler(state: TwoModeState, config: RunConfig):
    k = state.fock_index()
    kind = config.sampler
    if kind == "auto":
        kind = "exact-beta" if k is not None else "grid-cdf"
    if kind == "exact-beta":
        if k is None:
            raise ConfigurationError("exact-beta sampling needs a Fock state")
        return BetaSampler(state.N, k)
    return GridCdfSampler(state, *config.sampler_resolution)


def _shot_uniforms(master_seed: int, indices) -> np.ndarray:
    u = np.empty((len(indices), 2))
    for row, i in enumerate(indices):
        u[row] = RngStream(master_seed, int(i)).uniform(2)
    return u


def sample_shot(state: TwoModeState, stream: RngStream, config: RunConfig,
                sampler=None) -> CoherentParams:
    """Draw one image outcome (xi, phi) with density povm_weight(state, .)."""
    sampler = sampler or make_sampler(state, config)
    u1, u2 = stream.uniform(2)
    xi, phi = sampler.transform(np.array([u1]), np.array([u2]))
    return CoherentParams(float(xi[0]), float(phi[0]))


def sample_outcomes(state: TwoModeState, config: RunConfig, indices=None):
    """(xi, phi) arrays for shots `indices`, each drawn from its own stream."""
    if indices is None:
        indices = range(config.n_shots)
    sampler = make_sampler(state, config)
    u = _shot_uniforms(config.master_seed, indices)
    xi, phi = np.empty(len(u)), np.empty(len(u))
    for s in range(0, len(u), 4096):
        xi[s:s + 4096], phi[s:s + 4096] = sampler.transform(u[s:s + 4096, 0], u[s:s + 4096, 1])
    return xi, phi


# --- Monte Carlo ----------------------------------------------------------

def _chunk_stats(N, terms, xi, phi, idx, config):
    pop1, coh = shot_amplitudes(xi, phi)
    n = np.maximum(pattern(terms, N, pop1, coh), 0.0)
    if config.noise_sigma > 0:
        for row, i in enumerate(idx):
            stream = RngStream(config.master_seed, int(i))
            stream.uniform(2)
            n[row] += config.noise_sigma * stream.normal(n.shape[1])
    mean = n.mean(axis=0)
    m2 = ((n - mean) ** 2).sum(axis=0)
    return len(idx), mean, m2, (n if config.keep_profiles else None)


def run_monte_carlo(state: TwoModeState, family: WavepacketFamily, config: RunConfig,
                    threads: int = 1):
    """Average of n_shots simulated images and the per-shot records.

    The returned profile carries the per-point standard error of the mean.
    Output is identical for any `threads`.
    """
    N = state.N
    grid = config.grid
    xi, phi = sample_outcomes(state, config)
    terms = mode_terms(family, config.t, grid)
    starts = range(0, config.n_shots, CHUNK)

    def work(s):
        sl = slice(s, min(s + CHUNK, config.n_shots))
        return _chunk_stats(N, terms, xi[sl], phi[sl], range(sl.start, sl.stop), config)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]

    # Chan et al. pairwise update, always in chunk order
    count, mean, m2 = 0, np.zeros(grid.n_points), np.zeros(grid.n_points)
    for nb, mb, m2b, _ in parts:
        tot = count + nb
        delta = mb - mean
        mean = mean + delta * (nb / tot)
        m2 = m2 + m2b + delta ** 2 * (count * nb / tot)
        count = tot

    n = config.n_shots
    stderr = np.sqrt(m2 / (n - 1) / n) if n > 1 else np.zeros_like(mean)
    profile = DensityProfile(grid, mean, config.t, float(N), source="monte-carlo", stderr=stderr)

    records = []
    rows = np.concatenate([p[3] for p in parts]) if config.keep_profiles else None
    for i in range(n):
        params = CoherentParams(float(xi[i]), float(phi[i]))
        prof = None
        if rows is not None:
            prof = DensityProfile(grid, rows[i], config.t, float(N), source="shot")
        records.append(ShotRecord(i, params, prof))
    return profile, records


# --- quadrature and closed forms -----------------------------------------

def default_orders(state: TwoModeState) -> tuple[int, int]:
    N = state.N
    if state.fock_index() is not None:
        return N // 2 + 4, 64
    # phi-integrand is a trigonometric polynomial of degree N+1
    return N + 16, max(64, 2 * N + 16)


def povm_moments(state: TwoModeState, orders=None):
    """Total weight, E[xi] and E[sqrt(xi(1-xi)) e^{i phi}] under povm_weight."""
    n_xi, n_phi = orders or default_orders(state)
    qx = gauss_legendre(n_xi, 0.0, 1.0)
    qp = gauss_legendre(n_phi, 0.0, TWO_PI)
    w = povm_weight_grid(state, qx.nodes, qp.nodes) * np.outer(qx.weights, qp.weights)
    total = w.sum()
    pop1 = (w.sum(axis=1) * qx.nodes).sum()
    amp = np.sqrt(qx.nodes * (1.0 - qx.nodes))
    coh = (amp[:, None] * w * np.exp(1j * qp.nodes)[None, :]).sum()
    return float(total), float(pop1), complex(coh)


def povm_average_quadrature(state: TwoModeState, family: WavepacketFamily, t: float,
                            grid: SpatialGrid, orders=None) -> DensityProfile:
    """POVM-averaged density by Gauss-Legendre quadrature over (xi, phi).

    The image density is linear in xi and sqrt(xi(1-xi)) e^{i phi}, so the
    weighted sum over quadrature nodes reduces to three weighted moments.
    """
    total, pop1, coh = povm_moments(state, orders)
    terms = mode_terms(family, t, grid)
    N = state.N
    n = N * (pop1 * terms.p1 + (total - pop1) * terms.p2
             + 2.0 * (coh.real * terms.cross.real - coh.imag * terms.cross.imag))
    return DensityProfile(grid, np.maximum(n, 0.0), t, float(N), source="povm-quadrature")


def povm_fock_coefficients(N: int, k: int) -> tuple[float, float]:
    """Weights of |W1|^2 and |W2|^2 in the POVM average of |N;k>."""
    if not 0 <= k <= N:
        raise ValueError(f"k={k} outside 0..{N}")
    return N * (k + 1) / (N + 2), N * (N - k + 1) / (N + 2)


def difference_coefficients(N: int, k: int) -> tuple[float, float]:
    c1, c2 = povm_fock_coefficients(N, k)
    return c1 - k, c2 - (N - k)


def _two_mode_profile(c1, c2, family, t, grid, N, source):
    terms = mode_terms(family, t, grid)
    return DensityProfile(grid, c1 * terms.p1 + c2 * terms.p2, t, float(N), source=source)


def povm_average_fock_closed(N: int, k: int, family: WavepacketFamily, t: float,
                             grid: SpatialGrid) -> DensityProfile:
    c1, c2 = povm_fock_coefficients(N, k)
    return _two_mode_profile(c1, c2, family, t, grid, N, "povm-closed")


def trace_average_fock(N: int, k: int, family: WavepacketFamily, t: float,
                       grid: SpatialGrid) -> DensityProfile:
    if not 0 <= k <= N:
        raise ValueError(f"k={k} outside 0..{N}")
    return _two_mode_profile(float(k), float(N - k), family, t, grid, N, "operator-closed")


def density_difference(N: int, k: int, family: WavepacketFamily, t: float,
                       grid: SpatialGrid) -> DensityProfile:
    """POVM average minus operator average for |N;k>; signed, integrates to 0."""
    c1, c2 = difference_coefficients(N, k)
    return _two_mode_profile(c1, c2, family, t, grid, 0, "difference")
