"""Two-mode Bose-Hubbard Hamiltonian in the Fock basis (hbar = 1)."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hilbert import TwoModeState
from .numerics import eigh_tridiagonal


@dataclass(frozen=True)
class TrapParams:
    """Well depths e1, e2, on-site repulsion u and tunneling amplitude tt."""

    e1: float = 0.0
    e2: float = 0.0
    u: float = 0.0
    tt: float = 0.0

    def __post_init__(self):
        for name in ("e1", "e2", "u", "tt"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"trap parameter {name} must be finite")
        if self.u < 0:
            raise ValueError(f"on-site repulsion must be >= 0, got {self.u}")


def hamiltonian_tridiagonal(N: int, p: TrapParams) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal and off-diagonal of H in the basis |N;k>, k = 0..N."""
    if N < 0:
        raise ValueError("N must be nonnegative")
    k = np.arange(N + 1, dtype=float)
    diag = p.e1 * k + p.e2 * (N - k) + p.u * (k * (k - 1) + (N - k) * (N - k - 1))
    kk = k[:-1]
    offdiag = -p.tt * np.sqrt((kk + 1) * (N - kk))
    return diag, offdiag


def _fix_phase(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))
    return v * (abs(v[j]) / v[j])


def spectrum(N: int, p: TrapParams):
    return eigh_tridiagonal(*hamiltonian_tridiagonal(N, p))


def ground_state(N: int, p: TrapParams) -> TwoModeState:
    """Lowest eigenvector, phased so its largest coefficient is real positive."""
    sp = spectrum(N, p)
    v = sp.eigenvectors[:, 0].astype(complex)
    return TwoModeState(N, _fix_phase(v / np.linalg.norm(v)))


def ground_energy(N: int, p: TrapParams) -> float:
    return float(spectrum(N, p).eigenvalues[0])


def evolve_in_trap(state: TwoModeState, p: TrapParams, t: float) -> TwoModeState:
    """Apply exp(-i H t) by spectral decomposition."""
    if t == 0:
        return state
    sp = spectrum(state.N, p)
    v = sp.eigenvectors
    c = v @ (np.exp(-1j * sp.eigenvalues * t) * (v.T @ state.coeffs))
    return TwoModeState(state.N, c)
