"""Two-mode Hilbert space of N bosons: Fock states, phase (coherent-like)
states, overlaps, POVM weights and the one-body density matrix.

Convention: the Fock state |N;k> holds k atoms in well 1. The phase state
|N;xi,phi> weights mode 1 by sqrt(xi) e^{i phi/2}, so its coefficients are

    c_k = C(N,k)^{1/2} xi^{k/2} (1-xi)^{(N-k)/2} e^{+i phi (k - N/2)}

and <a1^dag a1 - a2^dag a2> = N (2 xi - 1). Only pure states are represented.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics

TWO_PI = 2.0 * math.pi
# log-amplitudes below this flush to exactly zero
LOG_FLOOR = -700.0


@dataclass(frozen=True)
class TwoModeState:
    N: int
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=complex)
        if self.N < 0:
            raise ValueError(f"atom number must be nonnegative, got {self.N}")
        if c.shape != (self.N + 1,):
            raise ValueError(f"expected {self.N + 1} coefficients, got shape {c.shape}")
        norm = float(np.vdot(c, c).real)
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state is not normalized (norm^2 = {norm!r})")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_vector(cls, coeffs) -> "TwoModeState":
        """Normalize an arbitrary nonzero vector into a state."""
        c = np.asarray(coeffs, dtype=complex)
        return cls(N=c.size - 1, coeffs=c / np.linalg.norm(c))

    def fock_index(self, tol: float = 1e-12) -> int | None:
        """k if this is (up to phase) the Fock state |N;k>, else None."""
        p = np.abs(self.coeffs) ** 2
        k = int(np.argmax(p))
        return k if p[k] > 1.0 - tol else None


@dataclass(frozen=True)
class CoherentParams:
    xi: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.xi <= 1.0) or not math.isfinite(self.xi):
            raise ValueError(f"xi must lie in [0, 1], got {self.xi}")
        if not math.isfinite(self.phi):
            raise ValueError(f"phi must be finite, got {self.phi}")
        object.__setattr__(self, "xi", float(self.xi))
        object.__setattr__(self, "phi", float(self.phi) % TWO_PI)


@dataclass(frozen=True)
class OneBodyMatrix:
    n1: float
    n2: float
    coh: complex  # <a1^dag a2>


def fock_state(N: int, k: int) -> TwoModeState:
    if not 0 <= k <= N:
        raise ValueError(f"Fock index k={k} outside 0..{N}")
    c = np.zeros(N + 1, dtype=complex)
    c[k] = 1.0
    return TwoModeState(N, c)


def _xlogy(a, x):
    """a * log(x) with 0 * log(0) = 0."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = a * np.log(x)
    return np.where(a == 0, 0.0, out)


def coherent_log_amplitudes(N: int, xi) -> np.ndarray:
    """log |c_k(xi)| with shape xi.shape + (N+1,); -inf where the amplitude is 0."""
    xi = np.asarray(xi, dtype=float)[..., None]
    k = np.arange(N + 1)
    la = (0.5 * numerics.log_binomial_row(N)
          + _xlogy(0.5 * k, xi) + _xlogy(0.5 * (N - k), 1.0 - xi))
    return np.where(la < LOG_FLOOR, -np.inf, la)


def coherent_amplitudes(N: int, xi) -> np.ndarray:
    """|c_k(xi)|, vectorized over xi."""
    return np.exp(coherent_log_amplitudes(N, xi))


def coherent_state(N: int, params: CoherentParams) -> TwoModeState:
    mag = coherent_amplitudes(N, params.xi)
    phase = np.exp(1j * params.phi * (np.arange(N + 1) - 0.5 * N))
    c = mag * phase
    # flushing tiny amplitudes leaves the norm off by far less than 1e-10
    return TwoModeState(N, c / np.linalg.norm(c))


def overlap(bra: TwoModeState, ket: TwoModeState) -> complex:
    """<bra|ket>."""
    if bra.N != ket.N:
        raise ValueError(f"atom numbers differ: {bra.N} vs {ket.N}")
    return complex(np.vdot(bra.coeffs, ket.coeffs))


def coherent_projections(state: TwoModeState, xi, phi) -> np.ndarray:
    """<N;xi,phi|state> on the tensor grid xi (shape m) x phi (shape p)."""
    N = state.N
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    k = np.arange(N + 1)
    b = coherent_amplitudes(N, xi) * state.coeffs  # (m, N+1)
    e = np.exp(-1j * np.outer(phi, k - 0.5 * N))   # (p, N+1)
    return b @ e.T


def povm_weight_grid(state: TwoModeState, xi, phi) -> np.ndarray:
    """(N+1)/(2 pi) |<N;xi,phi|state>|^2 on the tensor grid xi x phi."""
    amp = coherent_projections(state, xi, phi)
    return (state.N + 1) / TWO_PI * (amp.real ** 2 + amp.imag ** 2)


def povm_weight(state: TwoModeState, params: CoherentParams) -> float:
    """Joint probability density of the outcome (xi, phi) on [0,1] x [0,2 pi)."""
    return float(povm_weight_grid(state, params.xi, params.phi)[0, 0])


def one_body_matrix(state: TwoModeState) -> OneBodyMatrix:
    N = state.N
    c = state.coeffs
    p = c.real ** 2 + c.imag ** 2
    k = np.arange(N + 1)
    n1 = float(np.dot(k, p))
    n2 = float(np.dot(N - k, p))
    if N == 0:
        return OneBodyMatrix(n1, n2, 0j)
    hop = np.sqrt((k[:-1] + 1.0) * (N - k[:-1]))
    coh = complex(np.sum(np.conj(c[1:]) * c[:-1] * hop))
    return OneBodyMatrix(n1, n2, coh)


def coherent_gram(N: int, p: CoherentParams, q: CoherentParams) -> complex:
    """<N;p|N;q> in closed form."""
    half = 0.5 * (q.phi - p.phi)
    base = (math.sqrt(p.xi * q.xi) * complex(math.cos(half), math.sin(half))
            + math.sqrt((1.0 - p.xi) * (1.0 - q.xi)) * complex(math.cos(half), -math.sin(half)))
    return base ** N
