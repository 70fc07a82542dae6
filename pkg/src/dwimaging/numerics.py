"""Foundation routines: log-domain binomials, Gauss-Legendre rules, a symmetric
tridiagonal eigensolver (implicit-shift QL) and keyed random streams."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# log C(n, k) is summed exactly below this n
_EXACT_LIMIT = 20


def log_binomial(n: int, k: int) -> float:
    """Natural log of the binomial coefficient C(n, k)."""
    if n < 0 or k < 0 or k > n:
        raise ValueError(f"log_binomial needs 0 <= k <= n, got n={n}, k={k}")
    k = min(k, n - k)  # makes (n, k) and (n, n - k) bit-identical
    if k == 0:
        return 0.0
    if n < _EXACT_LIMIT:
        return math.fsum(math.log(n - j) - math.log(j + 1) for j in range(k))
    return math.lgamma(n + 1) - math.lgamma(k + 1) - math.lgamma(n - k + 1)


def log_binomial_row(n: int) -> np.ndarray:
    """ln C(n, k) for k = 0..n."""
    return np.array([log_binomial(n, k) for k in range(n + 1)])


@dataclass(frozen=True)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    a: float
    b: float

    def integrate(self, f) -> float:
        return float(np.dot(self.weights, f(self.nodes)))


def gauss_legendre(order: int, a: float, b: float) -> QuadratureRule:
    """Gauss-Legendre rule with `order` nodes mapped onto [a, b]."""
    if order < 1:
        raise ValueError(f"quadrature order must be >= 1, got {order}")
    if not a < b:
        raise ValueError(f"need a < b, got [{a}, {b}]")
    x, w = np.polynomial.legendre.leggauss(order)
    half = 0.5 * (b - a)
    return QuadratureRule(nodes=half * x + 0.5 * (a + b), weights=half * w,
                          order=order, a=a, b=b)


@dataclass(frozen=True)
class TridiagonalSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns


def eigh_tridiagonal(diag, offdiag, max_iter: int = 60) -> TridiagonalSpectrum:
    """Full eigendecomposition of a real symmetric tridiagonal matrix.

    Implicit-shift QL iteration with Wilkinson-type shifts, accumulating the
    Givens rotations into the eigenvector matrix. Eigenvalues are returned in
    ascending order with matching eigenvector columns.
    """
    d = np.array(diag, dtype=float)
    off = np.asarray(offdiag, dtype=float)
    n = d.size
    if n == 0:
        raise ValueError("empty matrix")
    if off.size != n - 1:
        raise ValueError(f"offdiag must have length {n - 1}, got {off.size}")
    e = np.zeros(n)
    e[: n - 1] = off
    z = np.eye(n)

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) + dd == dd:
                    break
                m += 1
            if m == l:
                break
            if it == max_iter:
                raise ArithmeticError("QL iteration did not converge")
            it += 1
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    deflated = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = z[:, i].copy()
                z[:, i] = c * zi - s * z[:, i + 1]
                z[:, i + 1] = s * zi + c * z[:, i + 1]
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    return TridiagonalSpectrum(eigenvalues=d[order], eigenvectors=z[:, order])


@dataclass
class RngStream:
    """Deterministic uniform stream keyed by (master_seed, stream_id).

    Backed by a Philox counter-based generator whose 128-bit key is the pair
    itself, so any stream can be rebuilt independently of every other one.
    """

    master_seed: int
    stream_id: int
    _gen: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        mask = (1 << 64) - 1
        key = np.array([self.master_seed & mask, self.stream_id & mask], dtype=np.uint64)
        self._gen = np.random.Generator(np.random.Philox(key=key))

    def uniform(self, size=None):
        return self._gen.random(size)

    def normal(self, size=None):
        return self._gen.standard_normal(size)


def rng_uniform(stream: RngStream) -> float:
    """Next variate in [0, 1) from `stream`."""
    return float(stream.uniform())
