"""Index arithmetic on the bottom level of a p-ary tree of depth M.

Sites are the integers ``0 .. p**M - 1`` in *matrix-index* order: the
most significant base-p digit selects the outermost Kronecker block.  Two
sites separate at level ``k`` when they agree in every digit above
position ``k``; their tree distance is ``p**-(M - k)``.

The p-adic ball labels (least significant digit first) are reached with
:func:`digit_reverse`; every per-class quantity is invariant under that
relabelling.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

from .errors import DomainError


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


@dataclass(frozen=True)
class TreeParams:
    """Branching degree ``p`` and depth ``M`` of the hierarchy.

    Site counts are exact Python integers, so ``p**M`` cannot overflow;
    only dense constructions carry a size cap.
    """

    p: int
    M: int

    def __post_init__(self):
        if isinstance(self.p, bool) or not isinstance(self.p, int) or self.p < 2:
            raise DomainError(f"p must be an integer >= 2, got {self.p!r}")
        if isinstance(self.M, bool) or not isinstance(self.M, int) or self.M < 1:
            raise DomainError(f"M must be an integer >= 1, got {self.M!r}")
        if not _is_prime(self.p):
            warnings.warn(
                f"p={self.p} is composite: the matrix construction is valid but "
                "the p-adic reading of the hierarchy requires a prime",
                stacklevel=3,
            )

    @property
    def n_sites(self) -> int:
        return self.p**self.M

    def class_size(self, k: int) -> int:
        _check_class(k, self)
        return 1 if k == 0 else (self.p - 1) * self.p ** (k - 1)

    def class_sizes(self) -> list[int]:
        return [self.class_size(k) for k in range(self.M + 1)]


def _check_site(n: int, tp: TreeParams) -> None:
    if not 0 <= n < tp.n_sites:
        raise DomainError(f"site index {n} outside [0, {tp.n_sites})")


def _check_class(k: int, tp: TreeParams) -> None:
    if not 0 <= k <= tp.M:
        raise DomainError(f"class index {k} outside [0, {tp.M}]")


def separation_level(n: int, n2: int, tp: TreeParams) -> int:
    """Smallest ``k`` with ``n // p**k == n2 // p**k``.

    This is the level whose coupling sits at entry ``(n, n2)`` of the
    Hamiltonian.
    """
    _check_site(n, tp)
    _check_site(n2, tp)
    k = 0
    while n != n2:
        n //= tp.p
        n2 //= tp.p
        k += 1
    return k


def tree_distance(n: int, n2: int, tp: TreeParams) -> float:
    k = separation_level(n, n2, tp)
    if k == 0:
        return 0.0
    return float(tp.p) ** -(tp.M - k)


def level_class_of(n: int, tp: TreeParams) -> int:
    """Index ``k`` of the class V_k containing site ``n`` (V_0 = {0})."""
    _check_site(n, tp)
    k = 0
    while n > 0:
        n //= tp.p
        k += 1
    return k


def class_members(k: int, tp: TreeParams) -> range:
    _check_class(k, tp)
    if k == 0:
        return range(0, 1)
    return range(tp.p ** (k - 1), tp.p**k)


def digit_reverse(n: int, tp: TreeParams) -> int:
    """Reverse the ``M`` base-p digits of ``n``.

    Maps matrix indices to p-adic ball-centre labels and back (involution).
    """
    _check_site(n, tp)
    out = 0
    for _ in range(tp.M):
        n, d = divmod(n, tp.p)
        out = out * tp.p + d
    return out


def padic_valuation(n: int, p: int) -> int:
    """Largest ``v`` such that ``p**v`` divides ``n``.

    ``n = 0`` has infinite valuation and is rejected; callers comparing
    labels must treat equality separately.
    """
    if p < 2:
        raise DomainError(f"p must be >= 2, got {p}")
    if n == 0:
        raise DomainError("valuation of 0 is infinite")
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
