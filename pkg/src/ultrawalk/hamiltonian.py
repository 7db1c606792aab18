"""Coupling sequences, the hierarchical Hamiltonian and its spectrum.

The Hamiltonian is the Parisi-type matrix built by the Kronecker recursion

    H_1     = eps_0 I_p + eps_1 (J_p - I_p)
    H_{m+1} = I_p (x) H_m + eps_{m+1} (J_p - I_p) (x) J_{p^m}

(J the all-ones matrix), so entry ``(n, n2)`` holds ``eps_k`` with ``k``
the separation level.  Its M+1 distinct eigenvalues are available in
closed form; the dense matrix exists only as an oracle and is capped in
size.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, ResourceCapError, ValidationError
from .ultrametric import TreeParams

DEFAULT_DENSE_CAP = 4096
_dense_cap = DEFAULT_DENSE_CAP


def get_dense_cap() -> int:
    return _dense_cap


def set_dense_cap(cap: int) -> None:
    """Change the largest site count for which dense matrices are built."""
    global _dense_cap
    if cap < 1:
        raise ValidationError(f"dense cap must be positive, got {cap}")
    _dense_cap = int(cap)


def check_dense(tp: TreeParams) -> None:
    if tp.n_sites > _dense_cap:
        raise ResourceCapError(
            f"p^M = {tp.p}^{tp.M} = {tp.n_sites} sites is too large for a dense "
            "matrix; use the closed-form (class-compressed) routines instead",
            _dense_cap,
        )


# ---------------------------------------------------------------------------
# coupling sequences
# ---------------------------------------------------------------------------


def default_eps0(eps, p: int) -> float:
    """Diagonal entry that makes every row of the Hamiltonian sum to zero."""
    return -(p - 1) * math.fsum(float(p) ** (k - 1) * e for k, e in enumerate(eps, 1))


@dataclass(frozen=True)
class EpsilonSequence:
    """Diagonal ``eps0`` and couplings ``eps = (eps_1, ..., eps_M)``.

    The couplings must satisfy ``0 < eps_M < ... < eps_1``; ties are
    rejected because they merge eigenspaces.
    """

    eps0: float
    eps: tuple

    def __post_init__(self):
        eps = tuple(float(e) for e in self.eps)
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "eps0", float(self.eps0))
        if not eps:
            raise ValidationError("at least one coupling is required")
        if not all(math.isfinite(e) for e in eps) or not math.isfinite(self.eps0):
            raise ValidationError(f"couplings must be finite, got eps0={self.eps0}, eps={eps}")
        if eps[-1] <= 0.0:
            raise ValidationError(f"eps_{len(eps)} = {eps[-1]!r} must be > 0")
        for k in range(1, len(eps)):
            if not eps[k] < eps[k - 1]:
                raise ValidationError(
                    f"ordering violated: eps_{k + 1} = {eps[k]!r} is not < "
                    f"eps_{k} = {eps[k - 1]!r}"
                )

    @classmethod
    def with_default(cls, eps, p: int) -> "EpsilonSequence":
        eps = tuple(float(e) for e in eps)
        return cls(default_eps0(eps, p), eps)

    @property
    def M(self) -> int:
        return len(self.eps)

    def eps0_shift(self, p: int) -> float:
        """Offset of ``eps0`` from its row-sum-zero default (0 if not overridden)."""
        return self.eps0 - default_eps0(self.eps, p)

    def with_eps0(self, eps0: float) -> "EpsilonSequence":
        return EpsilonSequence(eps0, self.eps)


def _check_positive(name: str, value: float, bound: float = 0.0) -> None:
    if not (math.isfinite(value) and value > bound):
        raise ValidationError(f"{name} must be > {bound}, got {value!r}")


@dataclass(frozen=True)
class Explicit:
    eps: tuple

    def couplings(self, tp: TreeParams) -> list[float]:
        if len(self.eps) != tp.M:
            raise ValidationError(f"expected {tp.M} couplings, got {len(self.eps)}")
        return [float(e) for e in self.eps]


@dataclass(frozen=True)
class _Formula:
    """Base for the closed-form landscapes.

    ``ref_level`` is the level at which the formula's offset vanishes; the
    literal finite-depth formula uses ``ref_level = M`` (the default when
    ``None``).  A fixed ``ref_level`` defines couplings for every level
    ``k >= 1`` independently of the depth, which is what the infinite-depth
    and long-time analyses need.  Changing it rescales time by a constant.
    """

    w0: float
    alpha: float
    ref_level: int | None = None

    _alpha_min = 0.0

    def __post_init__(self):
        _check_positive("w0", self.w0)
        _check_positive("alpha", self.alpha, self._alpha_min)

    def reference(self, M: int | None) -> int:
        if self.ref_level is not None:
            return self.ref_level
        if M is None:
            raise ValidationError(
                f"{type(self).__name__} landscape needs a fixed ref_level "
                "to define couplings at arbitrary depth"
            )
        return M

    def coupling(self, k: int, p: int, ref: int) -> float:
        raise NotImplementedError

    def couplings(self, tp: TreeParams) -> list[float]:
        ref = self.reference(tp.M)
        return [self.coupling(k, tp.p, ref) for k in range(1, tp.M + 1)]


class Linear(_Formula):
    """``eps_k = w0 * p**(-(1 + alpha) (k - ref))``; power-law relaxation."""

    def coupling(self, k, p, ref):
        return self.w0 * float(p) ** (-(1.0 + self.alpha) * (k - ref))


class Logarithmic(_Formula):
    """``eps_k = w0 * x / log(1 + x)**alpha`` with ``x = p**(ref - k)``."""

    _alpha_min = 1.0

    def coupling(self, k, p, ref):
        x = float(p) ** (ref - k)
        return self.w0 * x / math.log1p(x) ** self.alpha


class Exponential(_Formula):
    """``eps_k = w0 * x * exp(-alpha / x)`` with ``x = p**(ref - k)``."""

    def coupling(self, k, p, ref):
        x = float(p) ** (ref - k)
        return self.w0 * x * math.exp(-self.alpha / x)


Landscape = Union[Explicit, Linear, Logarithmic, Exponential]


def epsilon_sequence(ls: Landscape, tp: TreeParams) -> EpsilonSequence:
    """Couplings of ``ls`` at depth ``tp.M`` plus the default diagonal.

    The strict ordering is validated on the evaluated values, so a
    landscape that is not monotone for the given parameters raises.
    """
    eps = ls.couplings(tp)
    return EpsilonSequence.with_default(eps, tp.p)


# ---------------------------------------------------------------------------
# dense matrix and spectra
# ---------------------------------------------------------------------------


def build_hamiltonian(es: EpsilonSequence, tp: TreeParams) -> np.ndarray:
    if es.M != tp.M:
        raise ValidationError(f"sequence has {es.M} couplings, tree depth is {tp.M}")
    check_dense(tp)
    p = tp.p
    off = np.ones((p, p)) - np.eye(p)
    H = es.eps0 * np.eye(p) + es.eps[0] * off
    for m in range(2, tp.M + 1):
        H = np.kron(np.eye(p), H) + es.eps[m - 1] * np.kron(off, np.ones((p ** (m - 1),) * 2))
    return H


@dataclass(frozen=True)
class Spectrum:
    """Distinct eigenvalues ``etas[0..M]`` and their multiplicities."""

    etas: np.ndarray
    mults: tuple

    def expanded(self) -> np.ndarray:
        """Every eigenvalue repeated by multiplicity, ascending."""
        return np.sort(np.repeat(self.etas, self.mults))

    def trace(self) -> float:
        return math.fsum(m * e for m, e in zip(self.mults, self.etas))


def multiplicities(tp: TreeParams) -> tuple:
    p, M = tp.p, tp.M
    return tuple((p - 1) * p ** (M - m - 1) for m in range(M)) + (1,)


def spectrum_closed(es: EpsilonSequence, tp: TreeParams) -> Spectrum:
    """Closed-form eigenvalues.

    ``eta_m = eps0 + (p-1) sum_{k<=m} p^{k-1} eps_k - p^m eps_{m+1}`` is
    evaluated as ``-(p-1) sum_{k>m} p^{k-1} eps_k - p^m eps_{m+1} + shift``
    (identical under the default ``eps0``) so that small relaxation rates
    are not lost to cancellation against a large diagonal.  ``shift`` is
    the ``eps0`` override offset and moves every eigenvalue uniformly;
    without an override ``eta_M`` is exactly 0.
    """
    if es.M != tp.M:
        raise ValidationError(f"sequence has {es.M} couplings, tree depth is {tp.M}")
    p, M = float(tp.p), tp.M
    eps = np.asarray(es.eps)
    scaled = p ** np.arange(M) * eps  # p^{k-1} eps_k, k = 1..M
    tail = np.zeros(M + 1)
    tail[:M] = np.cumsum(scaled[::-1])[::-1]  # tail[j] = sum_{k >= j+1}
    shift = es.eps0_shift(tp.p)
    etas = np.empty(M + 1)
    for m in range(M):
        etas[m] = -(p - 1.0) * tail[m] - p**m * eps[m]
    etas[M] = 0.0
    if shift != 0.0:
        etas = etas + shift
    return Spectrum(etas, multiplicities(tp))


def spectrum_numeric(H: np.ndarray) -> np.ndarray:
    """All eigenvalues of a dense symmetric matrix, ascending."""
    H = np.asarray(H, dtype=float)
    if H.ndim != 2 or H.shape[0] != H.shape[1]:
        raise DomainError(f"expected a square matrix, got shape {H.shape}")
    if not np.allclose(H, H.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(H).max(initial=0.0))):
        raise DomainError("matrix is not symmetric")
    return np.linalg.eigvalsh(H)
