"""Integer partitions, generalized Pochhammer symbols and the multivariate Gamma.

Partitions are tuples of non-increasing positive integers.  The empty tuple is
the partition of 0.  Listings are in reverse lexicographic order, so ``(k)``
comes first and ``(1, ..., 1)`` last; every basis-change matrix in the
package indexes its rows and columns in this order.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction
from functools import lru_cache
from numbers import Rational

MAX_PARTS = 64


class Partition(tuple):
    """Immutable integer partition (a tuple of non-increasing positive ints)."""

    __slots__ = ()

    def __new__(cls, parts=()):
        parts = tuple(int(p) for p in parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"partition parts must be positive: {parts}")
        if any(a < b for a, b in zip(parts, parts[1:])):
            raise ValueError(f"partition parts must be non-increasing: {parts}")
        if len(parts) > MAX_PARTS:
            raise ValueError(f"partitions longer than {MAX_PARTS} parts are not supported")
        return super().__new__(cls, parts)

    @property
    def weight(self) -> int:
        return sum(self)

    @property
    def length(self) -> int:
        return len(self)

    def multiplicities(self) -> dict[int, int]:
        """Map part size i to its multiplicity, i.e. the exponents of 1^v1 2^v2 ..."""
        return dict(sorted(Counter(self).items()))

    def padded(self, m: int) -> tuple[int, ...]:
        if m < len(self):
            raise ValueError(f"cannot pad {self} to {m} entries")
        return tuple(self) + (0,) * (m - len(self))

    def conjugate(self) -> "Partition":
        if not self:
            return Partition()
        return Partition(sum(1 for p in self if p > i) for i in range(self[0]))

    def __repr__(self):
        return f"Partition({tuple(self)})"

    def __str__(self):
        return ",".join(str(p) for p in self) if self else "0"


def parse_partition(text: str) -> Partition:
    """Parse ``"2,1"`` style input; ``"0"`` and ``""`` give the empty partition."""
    text = text.strip().strip("()[]")
    if text in ("", "0"):
        return Partition()
    try:
        parts = [int(p) for p in text.split(",") if p.strip()]
    except ValueError as exc:
        raise ValueError(f"partition must be comma-separated integers, got {text!r}") from exc
    return Partition(parts)


@lru_cache(maxsize=None)
def _partitions(k: int, max_part: int, max_length: int) -> tuple[Partition, ...]:
    if k == 0:
        return (Partition(),)
    if max_length == 0:
        return ()
    out = []
    for first in range(min(k, max_part), 0, -1):
        for rest in _partitions(k - first, first, max_length - 1):
            out.append(Partition((first,) + rest))
    return tuple(out)


def enumerate_partitions(k: int, max_length: int | None = None) -> list[Partition]:
    """All partitions of ``k`` with at most ``max_length`` parts, reverse-lex ordered."""
    if k < 0:
        raise ValueError("k must be non-negative")
    if max_length is None:
        max_length = max(k, 1)
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    return list(_partitions(k, k, max_length))


def partitions_up_to(k: int, max_length: int | None = None) -> list[Partition]:
    out = []
    for j in range(k + 1):
        out.extend(enumerate_partitions(j, max_length if max_length is not None else max(j, 1)))
    return out


def dominates(kappa, lam) -> bool:
    """True when ``kappa`` dominates ``lam`` (same weight, partial sums >=)."""
    if sum(kappa) != sum(lam):
        return False
    a = b = 0
    for i in range(max(len(kappa), len(lam))):
        a += kappa[i] if i < len(kappa) else 0
        b += lam[i] if i < len(lam) else 0
        if a < b:
            return False
    return True


def _exact(a):
    return isinstance(a, (int, Rational))


def rising_factorial(a, k: int):
    out = Fraction(1) if _exact(a) else 1.0
    for i in range(k):
        out *= a + i
    return out


def gen_pochhammer(a, kappa, ell: int | None = None):
    """Generalized Pochhammer symbol prod_j (a - (j-1)/2)_{k_j}.

    Exact (a ``Fraction``) when ``a`` is an int or Fraction, float otherwise.
    ``ell`` only checks that the partition fits in ``ell`` rows.
    """
    if ell is not None and len(kappa) > ell:
        raise ValueError(f"partition {tuple(kappa)} has more than {ell} parts")
    exact = _exact(a)
    out = Fraction(1) if exact else 1.0
    for j, kj in enumerate(kappa):
        shift = Fraction(j, 2) if exact else j / 2
        out *= rising_factorial(a - shift, kj)
    return out


def _check_gamma_args(a, ell):
    if ell < 1:
        raise ValueError("ell must be at least 1")
    for i in range(ell):
        x = a - Fraction(i, 2) if _exact(a) else a - i / 2
        if x <= 0 and float(x) == math.floor(float(x)):
            raise ValueError(f"multivariate Gamma pole: argument {x} at index {i + 1}")


def multivariate_gamma(a, ell: int) -> float:
    """pi^{ell(ell-1)/4} prod_{i<=ell} Gamma(a - (i-1)/2)."""
    _check_gamma_args(a, ell)
    out = math.pi ** (ell * (ell - 1) / 4)
    for i in range(ell):
        out *= math.gamma(float(a) - i / 2)
    return out


def log_multivariate_gamma(a, ell: int) -> float:
    """Log of |Gamma_ell(a)|; avoids overflow for large arguments."""
    _check_gamma_args(a, ell)
    out = ell * (ell - 1) / 4 * math.log(math.pi)
    for i in range(ell):
        out += math.lgamma(float(a) - i / 2)
    return out
