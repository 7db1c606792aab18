"""Continuous-time quantum walk started at site 0 of the hierarchy.

The amplitude is constant on every class ``V_k`` (sites at separation
level ``k`` from the origin), so the walk is carried as ``M + 1`` class
values instead of ``p**M`` site values.  With ``f_m = exp(i t eta_m)``:

    V_0 : (p-1) sum_{m<M} p^-(m+1) f_m + p^-M f_M
    V_k : -p^-k f_{k-1} + (p-1) sum_{k<=m<M} p^-(m+1) f_m + p^-M f_M

Under the default diagonal ``eta_M = 0`` and ``f_M = 1``.  Suffix sums make
every evaluation O(M).  Dense ``exp(itH)`` evolution is kept as an oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import DomainError, ValidationError
from .hamiltonian import (
    EpsilonSequence,
    Landscape,
    Spectrum,
    _Formula,
    build_hamiltonian,
    epsilon_sequence,
    spectrum_closed,
)
from .numerics import min_steps, time_average
from .ultrametric import TreeParams, level_class_of

# ---------------------------------------------------------------------------
# containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WalkParams:
    """Tree, couplings and the cached closed-form spectrum of one walk."""

    tp: TreeParams
    es: EpsilonSequence
    spectrum: Spectrum = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.es.M != self.tp.M:
            raise ValidationError(
                f"sequence has {self.es.M} couplings, tree depth is {self.tp.M}"
            )
        object.__setattr__(self, "spectrum", spectrum_closed(self.es, self.tp))

    @classmethod
    def from_couplings(cls, p: int, eps, eps0: float | None = None) -> "WalkParams":
        tp = TreeParams(p, len(eps))
        es = EpsilonSequence.with_default(eps, p)
        if eps0 is not None:
            es = es.with_eps0(eps0)
        return cls(tp, es)

    @classmethod
    def from_landscape(cls, ls: Landscape, tp: TreeParams) -> "WalkParams":
        return cls(tp, epsilon_sequence(ls, tp))

    @property
    def p(self) -> int:
        return self.tp.p

    @property
    def M(self) -> int:
        return self.tp.M


@dataclass(frozen=True)
class ClassProfile:
    """One value per class ``V_0 .. V_M`` standing for a ``p**M`` site vector.

    ``values`` is complex for amplitudes, float for probabilities and an
    object array of :class:`~fractions.Fraction` for exact results.
    """

    p: int
    M: int
    values: np.ndarray

    @property
    def sizes(self) -> list[int]:
        return [1] + [(self.p - 1) * self.p ** (k - 1) for k in range(1, self.M + 1)]

    @property
    def exact(self) -> bool:
        return self.values.dtype == object

    def total(self):
        """Sum of the expanded site vector (exact when the profile is)."""
        if self.exact:
            return sum((s * v for s, v in zip(self.sizes, self.values)), Fraction(0))
        return math.fsum(float(s) * float(v) for s, v in zip(self.sizes, self.values))

    def norm_squared(self) -> float:
        return math.fsum(float(s) * abs(complex(v)) ** 2 for s, v in zip(self.sizes, self.values))

    def as_float(self) -> np.ndarray:
        if self.exact:
            return np.array([float(v) for v in self.values])
        return np.asarray(self.values)

    def expand(self) -> np.ndarray:
        """Site-resolved vector of length ``p**M`` (small trees only)."""
        return np.repeat(self.as_float(), self.sizes)

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]


# ---------------------------------------------------------------------------
# amplitudes and probabilities
# ---------------------------------------------------------------------------


def _mode_weights(p: int, M: int) -> np.ndarray:
    w = (p - 1.0) * float(p) ** -(np.arange(M) + 1.0)
    return np.append(w, float(p) ** -M)


def combine_classes(p: int, M: int, factors: np.ndarray) -> np.ndarray:
    """Class values from per-mode factors ``f_m`` (last axis, length M+1).

    Shared by the quantum walk (``f_m = exp(i t eta_m)``) and the classical
    walk (``f_m = exp(t eta_m)``).
    """
    terms = factors * _mode_weights(p, M)
    suffix = np.flip(np.cumsum(np.flip(terms, -1), -1), -1)
    out = suffix.copy()
    drop = float(p) ** -np.arange(1, M + 1.0)
    out[..., 1:] -= drop * factors[..., :M]
    return out


def _check_time(t) -> np.ndarray:
    arr = np.asarray(t, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"time must be finite, got {t!r}")
    return arr


def amplitude_grid(wp: WalkParams, ts) -> np.ndarray:
    """Class amplitudes for an array of times; shape ``(len(ts), M+1)``."""
    ts = _check_time(ts)
    phases = np.exp(1j * np.multiply.outer(ts, wp.spectrum.etas))
    return combine_classes(wp.p, wp.M, phases)


def amplitude(wp: WalkParams, t: float) -> ClassProfile:
    return ClassProfile(wp.p, wp.M, amplitude_grid(wp, [t])[0])


def probabilities(wp: WalkParams, t: float) -> ClassProfile:
    return ClassProfile(wp.p, wp.M, np.abs(amplitude_grid(wp, [t])[0]) ** 2)


def probability(wp: WalkParams, n: int, t: float) -> float:
    """Probability of finding the walker at site ``n`` at time ``t``."""
    k = level_class_of(n, wp.tp)
    return float(probabilities(wp, t).values[k])


def evolve_oracle(wp: WalkParams, t: float) -> np.ndarray:
    """``exp(itH) e_0`` by dense diagonalisation (test oracle)."""
    (t,) = np.atleast_1d(_check_time(t))
    H = build_hamiltonian(wp.es, wp.tp)
    lam, V = np.linalg.eigh(H)
    return V @ (np.exp(1j * t * lam) * V[0])


# ---------------------------------------------------------------------------
# time averages
# ---------------------------------------------------------------------------


def time_averaged_exact(p: int, M: int) -> list[Fraction]:
    """Long-time average per class; depends on ``p`` and ``M`` only."""
    tail = Fraction(2, (p + 1) * p ** (2 * M))
    out = [Fraction(p - 1, p + 1) + tail]
    for k in range(1, M):
        out.append(Fraction(2, (p + 1) * p ** (2 * k - 1)) + tail)
    out.append(Fraction(2, p ** (2 * M)))
    return out


def time_averaged(wp: WalkParams, exact: bool = True) -> ClassProfile:
    """Exact long-time average of the class probabilities.

    Requires distinct eigenvalues, which the strict coupling order
    guarantees; the result never reads the couplings themselves.
    """
    vals = time_averaged_exact(wp.p, wp.M)
    arr = np.array(vals, dtype=object) if exact else np.array([float(v) for v in vals])
    return ClassProfile(wp.p, wp.M, arr)


def spectral_gap(spectrum: Spectrum) -> float:
    """Smallest nonzero separation among the eigenvalues and from zero."""
    etas = np.asarray(spectrum.etas)
    cand = np.abs(np.subtract.outer(etas, etas))[np.triu_indices(len(etas), 1)]
    cand = np.concatenate([cand, np.abs(etas[etas != 0.0])])
    cand = cand[cand > 0.0]
    return float(cand.min()) if cand.size else math.inf


def time_averaged_numeric(wp: WalkParams, T: float, steps: int | None = None) -> ClassProfile:
    """Trapezoid estimate of ``(1/T) * integral_0^T P(V_k, s) ds``.

    Step size must resolve the fastest phase (``<= 0.1 / max|eta|``); the
    result approaches :func:`time_averaged` with error ``O(1 / (T * gap))``.
    """
    fastest = float(np.max(np.abs(wp.spectrum.etas)))
    needed = min_steps(T, fastest)
    if steps is None:
        steps = needed
    elif steps < needed:
        raise ValidationError(
            f"{steps} steps undersample [0, {T}]: need >= {needed} for step <= 0.1/max|eta|"
        )
    vals = time_average(lambda s: np.abs(amplitude_grid(wp, s)) ** 2, T, steps)
    return ClassProfile(wp.p, wp.M, np.asarray(vals, dtype=float))


# ---------------------------------------------------------------------------
# infinite depth
# ---------------------------------------------------------------------------


class InfiniteSpectrum:
    """Eigenvalues ``eta_m`` of the depth -> infinity walk for a landscape.

    The landscape must carry a fixed ``ref_level`` so that ``eps_k`` exists
    for every ``k``.  With the default diagonal,

        eta_m = -(p-1) sum_{k>m} p^{k-1} eps_k - p^m eps_{m+1},

    which needs ``p^{k-1} eps_k`` to be summable; the tail is summed until
    the terms drop below double precision of the running total.
    """

    max_terms = 4000

    def __init__(self, ls: _Formula, p: int):
        if not isinstance(ls, _Formula):
            raise ValidationError("infinite depth needs a formula landscape")
        self.ref = ls.reference(None)
        self.ls = ls
        self.p = p
        self._cache: dict[int, float] = {}

    def coupling(self, k: int) -> float:
        return self.ls.coupling(k, self.p, self.ref)

    def _scaled(self, k: int) -> float:
        try:
            return float(self.p) ** (k - 1) * self.coupling(k)
        except OverflowError:
            raise ValidationError(f"coupling tail overflows at level {k}") from None

    def __call__(self, m: int) -> float:
        if m < 0:
            raise DomainError(f"mode index must be >= 0, got {m}")
        if m not in self._cache:
            acc = 0.0
            k = m + 1
            while True:
                term = self._scaled(k)
                acc += term
                c_k = self.coupling(k)
                # couplings that underflowed to zero are tolerated
                if not math.isfinite(acc) or (c_k > 0.0 and self.coupling(k + 1) >= c_k):
                    raise ValidationError(
                        f"{self.ls!r} does not give decreasing, summable couplings beyond level {k}"
                    )
                if term <= 1e-18 * acc:
                    break
                k += 1
                if k - m > self.max_terms:
                    raise ValidationError(
                        f"sum of p^(k-1) eps_k does not converge for {self.ls!r}"
                    )
            self._cache[m] = -(self.p - 1) * acc - float(self.p) ** m * self.coupling(m + 1)
        return self._cache[m]

    def etas(self, K: int) -> np.ndarray:
        return np.array([self(m) for m in range(K)])


def probability_infinite(
    p: int,
    eta: Callable[[int], float],
    k: int,
    t,
    K: int,
) -> tuple[np.ndarray | float, float | np.ndarray]:
    """Depth -> infinity class probability truncated after ``K`` modes.

    Returns ``(value, radius)``; the untruncated probability lies within
    ``radius`` of ``value``.  Dropped modes carry total weight
    ``delta = (p-1) sum_{m>=K} p^-(m+1) = p^-K``, so with ``a_K`` the
    truncated amplitude ``|P - |a_K|^2| <= delta (2 |a_K| + delta)``.
    """
    if k < 0:
        raise DomainError(f"class index must be >= 0, got {k}")
    if K <= k:
        raise ValidationError(f"truncation K={K} must exceed the class index k={k}")
    ts = _check_time(t)
    scalar = ts.ndim == 0
    ts = np.atleast_1d(ts)
    etas = np.array([eta(m) for m in range(K)])
    phases = np.exp(1j * np.multiply.outer(ts, etas))
    w = (p - 1.0) * float(p) ** -(np.arange(K) + 1.0)
    amp = phases[:, k:] @ w[k:]
    if k >= 1:
        amp = amp - float(p) ** -k * phases[:, k - 1]
    delta = float(p) ** -K
    mod = np.abs(amp)
    value = mod**2
    radius = delta * (2.0 * mod + delta)
    if scalar:
        return float(value[0]), float(radius[0])
    return value, radius


def time_averaged_limit(p: int, k: int) -> Fraction:
    """Class average in the depth -> infinity limit."""
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if k < 0:
        raise DomainError(f"class index must be >= 0, got {k}")
    if k == 0:
        return Fraction(p - 1, p + 1)
    return Fraction(2, (p + 1) * p ** (2 * k - 1))


def limit_gap(p: int, M: int) -> Fraction:
    """Exact excess of the depth-M class average over its limit (every class)."""
    return Fraction(2, (p + 1) * p ** (2 * M))


def localized(profile: ClassProfile) -> list[bool]:
    """Per class: is the (time-averaged) probability strictly positive?"""
    return [v > 0 for v in profile.values]


# ---------------------------------------------------------------------------
# mean distance from the origin
# ---------------------------------------------------------------------------


def mean_distance(wp: WalkParams, t: float) -> float:
    probs = probabilities(wp, t).values
    p, M = wp.p, wp.M
    return math.fsum(
        (p - 1) * float(p) ** (k - 1) * float(p) ** -(M - k) * probs[k] for k in range(1, M + 1)
    )


def mean_distance_weighted(p: int, M: int) -> Fraction:
    """Time-averaged mean distance as the class-weighted sum of averages."""
    avg = time_averaged_exact(p, M)
    return sum(
        ((p - 1) * p ** (k - 1) * Fraction(1, p ** (M - k)) * avg[k] for k in range(1, M + 1)),
        Fraction(0),
    )


def mean_distance_closed(p: int, M: int) -> Fraction:
    first = Fraction(2 * (p - 1) * (M - 1), (p + 1) * p**M)
    second = Fraction(
        2 * (((p - 1) * (p + 1) ** 2 + 1) * p ** (2 * M - 2) - 1),
        (p + 1) ** 2 * p ** (3 * M - 1),
    )
    return first + second


def time_averaged_mean_distance(wp: WalkParams) -> Fraction:
    return mean_distance_closed(wp.p, wp.M)


def scaled_mean_distance_limit(p: int) -> Fraction:
    """Limit of ``p**M * dbar / M`` as the depth grows."""
    return Fraction(2 * (p - 1), p + 1)
