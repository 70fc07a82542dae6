"""Quick invariant suite behind `dwimaging selftest`."""
from __future__ import annotations

import math
import time
from typing import Callable

import numpy as np

from . import hilbert, imaging
from .diagnostics import ks_beta, uniform_phase_pvalue
from .expansion import SpatialGrid, WavepacketFamily
from .numerics import gauss_legendre
from .trap import TrapParams, ground_state


def _random_state(rng: np.random.Generator, N: int) -> hilbert.TwoModeState:
    return hilbert.TwoModeState.from_vector(rng.normal(size=N + 1) + 1j * rng.normal(size=N + 1))


def weight_integral(state: hilbert.TwoModeState) -> float:
    total, _, _ = imaging.povm_moments(state)
    return total


def check_completeness() -> tuple[bool, str]:
    rng = np.random.default_rng(20240601)
    worst = 0.0
    for N in (1, 5, 20):
        for _ in range(10):
            worst = max(worst, abs(weight_integral(_random_state(rng, N)) - 1.0))
    return worst <= 1e-8, f"max |int povm_weight - 1| = {worst:.2e}"


def check_oracle_chain() -> tuple[bool, str]:
    fam, grid = WavepacketFamily(), SpatialGrid(-100.0, 100.0, 1001)
    worst = 0.0
    for N in (2, 10, 50):
        for k in range(N + 1):
            q = imaging.povm_average_quadrature(hilbert.fock_state(N, k), fam, 30.0, grid).values
            c = imaging.povm_average_fock_closed(N, k, fam, 30.0, grid).values
            m = c > 0
            worst = max(worst, float(np.max(np.abs(q[m] - c[m]) / c[m])))
    return worst <= 1e-8, f"max relative |quadrature - closed| = {worst:.2e}"


def check_balanced() -> tuple[bool, str]:
    bad = [N for N in (2, 10, 100) if imaging.difference_coefficients(N, N // 2) != (0.0, 0.0)]
    return not bad, "balanced-well coefficients identical" if not bad else f"mismatch at N={bad}"


def check_sampling() -> tuple[bool, str]:
    N, k, n = 20, 3, 20000
    cfg = imaging.RunConfig(n_shots=n, master_seed=11)
    xi, phi = imaging.sample_outcomes(hilbert.fock_state(N, k), cfg)
    ks = ks_beta(xi, k + 1, N - k + 1)
    p = uniform_phase_pvalue(phi)
    ok = ks <= 1.63 / math.sqrt(n) and p >= 1e-3
    return ok, f"KS = {ks:.4f} (limit {1.63 / math.sqrt(n):.4f}), phase chi2 p = {p:.3f}"


def check_ground_states() -> tuple[bool, str]:
    N = 20
    mott = ground_state(N, TrapParams(u=1.0, tt=0.0))
    f_mott = abs(hilbert.overlap(mott, hilbert.fock_state(N, N // 2))) ** 2
    free = ground_state(N, TrapParams(u=0.0, tt=1.0))
    coh = hilbert.coherent_state(N, hilbert.CoherentParams(0.5, 0.0))
    f_free = abs(hilbert.overlap(free, coh)) ** 2
    sf = ground_state(N, TrapParams(u=1.0, tt=100.0))
    f_sf = abs(hilbert.overlap(sf, coh)) ** 2
    ok = abs(f_mott - 1) <= 1e-12 and abs(f_free - 1) <= 1e-9 and f_sf > 0.99
    return ok, f"fidelities: Mott {f_mott:.15f}, free {f_free:.12f}, T/U=100 {f_sf:.5f}"


def check_quadrature() -> tuple[bool, str]:
    q = gauss_legendre(16, 0.0, 1.0)
    err = abs(q.integrate(lambda x: x ** 3 * (1 - x) ** 4) - 1.0 / 280.0)
    return err <= 1e-15, f"|B(4,5) - 1/280| = {err:.1e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "quadrature": check_quadrature,
    "completeness": check_completeness,
    "oracle-chain": check_oracle_chain,
    "balanced-well": check_balanced,
    "binomial-sampling": check_sampling,
    "ground-states": check_ground_states,
}


def run_selftest(echo=print) -> int:
    """Run every check; returns the number of failures."""
    failures = 0
    for name, check in CHECKS.items():
        t0 = time.perf_counter()
        try:
            ok, detail = check()
        except Exception as exc:  # a crash counts as a failed check
            ok, detail = False, f"error: {exc!r}"
        failures += not ok
        echo(f"{'PASS' if ok else 'FAIL'}  {name:<18} {detail}  ({time.perf_counter() - t0:.2f} s)")
    return failures
