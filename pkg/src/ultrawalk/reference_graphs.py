"""Quantum walks on the comparison graphs: cycle, line, hypercube, complete.

Closed forms are exact rationals where the long-time averages are
rational; every family has a dense or quadrature oracle for testing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, ValidationError
from .numerics import min_steps, time_average

FAMILIES = ("cycle", "line", "hypercube", "complete")
_MIN_SIZE = {"cycle": 3, "hypercube": 1, "complete": 2}


@dataclass(frozen=True)
class GraphSpec:
    """Reference graph selector; ``N`` is ignored for the line."""

    family: str
    N: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise DomainError(f"unknown graph family {self.family!r}; choose from {FAMILIES}")
        if self.family == "line":
            return
        lo = _MIN_SIZE[self.family]
        if self.N is None or self.N < lo:
            raise DomainError(f"{self.family} graph needs N >= {lo}, got {self.N!r}")


# ---------------------------------------------------------------------------
# cycle
# ---------------------------------------------------------------------------


def cycle_time_averaged(N: int) -> list[Fraction]:
    """``1/N + 2 R_N(n) / N**2`` per site.

    ``R_N(n)`` is ``Nbar`` where ``2n = 0 (mod N)`` (the origin, and the
    antipode for even N) and ``-1/2`` (odd N) or ``-1`` (even N) elsewhere,
    with ``Nbar = (N-1)/2`` for odd and ``(N-2)/2`` for even N.
    """
    if N < 3:
        raise DomainError(f"cycle needs N >= 3, got {N}")
    if N % 2:
        nbar, other = Fraction(N - 1, 2), Fraction(-1, 2)
    else:
        nbar, other = Fraction(N - 2, 2), Fraction(-1)
    out = []
    for n in range(N):
        R = nbar if (2 * n) % N == 0 else other
        out.append(Fraction(1, N) + 2 * R / N**2)
    return out


def cycle_adjacency(N: int) -> np.ndarray:
    A = np.zeros((N, N))
    idx = np.arange(N)
    A[idx, (idx + 1) % N] = 1.0
    A[idx, (idx - 1) % N] = 1.0
    return A


def cycle_probabilities(N: int, t: float) -> np.ndarray:
    """``|<n| exp(itA) |0>|**2`` on the cycle from its Fourier modes."""
    if N < 3:
        raise DomainError(f"cycle needs N >= 3, got {N}")
    xi = 2.0 * np.pi * np.arange(N) / N
    amp = np.fft.ifft(np.exp(2j * t * np.cos(xi)))
    return np.abs(amp) ** 2


def graph_time_average_numeric(H: np.ndarray, T: float, steps: int | None = None) -> np.ndarray:
    """Trapezoid average of ``|<n| exp(itH) |0>|**2`` over ``[0, T]``."""
    lam, V = np.linalg.eigh(np.asarray(H, dtype=float))
    fastest = float(np.max(np.abs(lam)))
    needed = min_steps(T, fastest)
    if steps is None:
        steps = needed
    elif steps < needed:
        raise ValidationError(f"{steps} steps undersample [0, {T}]: need >= {needed}")
    c = V[0]

    def prob(s):
        amp = (np.exp(1j * np.multiply.outer(s, lam)) * c) @ V.T
        return np.abs(amp) ** 2

    return time_average(prob, T, steps)


# ---------------------------------------------------------------------------
# line: Bessel functions of the first kind
# ---------------------------------------------------------------------------

_BIG = 1e100  # rescale threshold; squares must stay finite
_TINY_T = 1e-6


def _miller_start(nmax: int, tmax: float) -> int:
    m = max(nmax, int(math.ceil(tmax)))
    start = m + 20 + int(math.sqrt(40.0 * (m + 1)))
    return start + (start % 2)


def bessel_j_orders(nmax: int, t) -> np.ndarray:
    """``J_0 .. J_nmax`` at each ``t >= 0``; shape ``(len(t), nmax+1)``.

    Miller's algorithm: the three-term recurrence is run downward from an
    order well above ``max(nmax, t)`` where it is stable, then scaled so
    that ``J_0**2 + 2 sum J_k**2 = 1``; the sign comes from
    ``J_0 + 2 sum J_{2k} = 1``.  Upward recurrence is never used.
    """
    if nmax < 0:
        raise DomainError(f"order must be >= 0, got {nmax}")
    ts = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(ts < 0.0) or not np.all(np.isfinite(ts)):
        raise DomainError("bessel_j_orders needs finite t >= 0")
    out = np.zeros((ts.size, nmax + 1))
    tiny = ts < _TINY_T
    if np.any(tiny):
        # two-term power series; truncation error O(t**(n+4))
        h = ts[tiny, None] / 2.0
        n = np.arange(nmax + 1)
        lead = h**n / np.array([math.factorial(int(i)) for i in n], dtype=float)
        out[tiny] = lead * (1.0 - h * h / (n + 1.0))
    x = ts[~tiny]
    if x.size == 0:
        return out
    start = _miller_start(nmax, float(x.max()))
    orders = np.zeros((x.size, nmax + 1))
    j_hi = np.zeros_like(x)  # J_{k+1}
    j_k = np.full_like(x, 1e-30)  # J_k, arbitrary seed
    sum_sq = np.zeros_like(x)
    sum_even = np.zeros_like(x)
    for k in range(start, 0, -1):
        if k <= nmax:
            orders[:, k] = j_k
        sum_sq += j_k * j_k
        if k % 2 == 0:
            sum_even += j_k
        j_lo = (2.0 * k / x) * j_k - j_hi
        j_hi, j_k = j_k, j_lo
        big = np.abs(j_k) > _BIG
        if np.any(big):
            s = np.where(big, 1.0 / _BIG, 1.0)
            j_hi *= s
            j_k *= s
            sum_sq *= s * s
            sum_even *= s
            orders *= s[:, None]
    orders[:, 0] = j_k
    norm = np.sqrt(j_k * j_k + 2.0 * sum_sq)
    sign = np.sign(j_k + 2.0 * sum_even)
    out[~tiny] = orders * (sign / norm)[:, None]
    return out


def bessel_j(n: int, t: float) -> float:
    """``J_n(t)``; negative ``t`` uses ``J_n(-t) = (-1)**n J_n(t)``."""
    if n < 0:
        raise DomainError(f"order must be >= 0, got {n}")
    val = float(bessel_j_orders(n, abs(t))[0, n])
    return -val if (t < 0 and n % 2) else val


def line_probability(n: int, t: float) -> float:
    """``J_n(t)**2``: the line walk (hopping 1/2) started at the origin."""
    return bessel_j(abs(n), t) ** 2


def line_time_averages(nmax: int, T: float, steps: int | None = None) -> np.ndarray:
    """``(1/T) * integral_0^T J_n(s)**2 ds`` for ``n = 0 .. nmax``."""
    needed = min_steps(T, 2.0)
    if steps is None:
        steps = needed
    elif steps < needed:
        raise ValidationError(f"{steps} steps undersample [0, {T}]: need >= {needed}")
    return time_average(lambda s: bessel_j_orders(nmax, s) ** 2, T, steps)


def line_time_average(n: int, T: float, steps: int | None = None) -> float:
    return float(line_time_averages(abs(n), T, steps)[abs(n)])


# ---------------------------------------------------------------------------
# hypercube
# ---------------------------------------------------------------------------


def _check_weight(k: int, N: int) -> None:
    if N < 1:
        raise DomainError(f"hypercube needs N >= 1, got {N}")
    if not 0 <= k <= N:
        raise DomainError(f"Hamming weight {k} outside [0, {N}]")


def hypercube_probability(k: int, N: int, t):
    """Probability at one site of Hamming weight ``k`` on the N-cube."""
    _check_weight(k, N)
    c, s = np.cos(np.asarray(t, dtype=float) / N), np.sin(np.asarray(t, dtype=float) / N)
    return c ** (2 * (N - k)) * s ** (2 * k)


def hypercube_class_average(k: int, N: int) -> Fraction:
    """Long-time probability of the whole weight-``k`` shell (discrete arcsine law)."""
    _check_weight(k, N)
    return Fraction(math.comb(2 * k, k) * math.comb(2 * (N - k), N - k), 4**N)


def hypercube_time_averaged(N: int) -> tuple[list[Fraction], list[Fraction]]:
    """Per-site and per-shell long-time averages, indexed by Hamming weight."""
    shells = [hypercube_class_average(k, N) for k in range(N + 1)]
    sites = [v / math.comb(N, k) for k, v in enumerate(shells)]
    return sites, shells


def hypercube_hamiltonian(N: int) -> np.ndarray:
    """Adjacency of the N-cube divided by ``N`` (dense oracle)."""
    if N < 1:
        raise DomainError(f"hypercube needs N >= 1, got {N}")
    idx = np.arange(2**N)
    A = np.zeros((2**N, 2**N))
    for b in range(N):
        A[idx, idx ^ (1 << b)] = 1.0
    return A / N


# ---------------------------------------------------------------------------
# complete graph
# ---------------------------------------------------------------------------


def complete_probability(n_is_zero: bool, N: int, t):
    if N < 2:
        raise DomainError(f"complete graph needs N >= 2, got {N}")
    c = np.cos(N * np.asarray(t, dtype=float))
    if n_is_zero:
        return ((N - 1) ** 2 + 1 + 2 * (N - 1) * c) / N**2
    return 2.0 * (1.0 - c) / N**2


def complete_time_averaged(N: int) -> tuple[Fraction, Fraction]:
    """Long-time averages ``(at the origin, at any other site)``."""
    if N < 2:
        raise DomainError(f"complete graph needs N >= 2, got {N}")
    return Fraction((N - 1) ** 2 + 1, N**2), Fraction(2, N**2)


def complete_adjacency(N: int) -> np.ndarray:
    return np.ones((N, N)) - np.eye(N)


# ---------------------------------------------------------------------------
# localization summary
# ---------------------------------------------------------------------------


def max_time_averaged(spec: GraphSpec, T: float = 1000.0, nmax: int = 40) -> float:
    """Largest long-time site probability of a reference graph.

    The line has no finite closed form; its value is the quadrature average
    over ``[0, T]`` maximised over orders ``|n| <= nmax``.
    """
    if spec.family == "cycle":
        return float(max(cycle_time_averaged(spec.N)))
    if spec.family == "hypercube":
        return float(max(hypercube_time_averaged(spec.N)[0]))
    if spec.family == "complete":
        return float(max(complete_time_averaged(spec.N)))
    return float(np.max(line_time_averages(nmax, T)))
