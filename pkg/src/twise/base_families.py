"""Explicit t-wise uniform families: trivial groups, cyclic shifts, affine
maps over a prime field and Möbius maps on the projective line."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations
from math import factorial

import numpy as np

from .perm_core import MATERIALIZATION_CAP, CapExceeded, Permutation, PermFamily, parity


def smallest_factor(n: int) -> int:
    """Smallest prime factor of n >= 2, by trial division."""
    if n % 2 == 0:
        return 2
    f = 3
    while f * f <= n:
        if n % f == 0:
            return f
        f += 2
    return n


def is_prime(n: int) -> bool:
    return n >= 2 and smallest_factor(n) == n


@dataclass(frozen=True)
class PrimeField:
    """Arithmetic modulo a prime p.

    The projective line over the field is encoded as {0, ..., p}, with the
    point at infinity stored as ``p``.
    """

    p: int

    def __post_init__(self):
        if self.p < 2:
            raise ValueError(f"{self.p} is not prime")
        f = smallest_factor(self.p)
        if f != self.p:
            raise ValueError(f"{self.p} is not prime: divisible by {f}")

    @property
    def infinity(self) -> int:
        return self.p

    def add(self, a: int, b: int) -> int:
        return (a + b) % self.p

    def mul(self, a: int, b: int) -> int:
        return (a * b) % self.p

    def inv(self, a: int) -> int:
        if a % self.p == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, -1, self.p)

    def mobius(self, a: int, b: int, c: int, d: int, x: int) -> int:
        """Image of projective point x under x -> (ax + b) / (cx + d)."""
        p = self.p
        if x == p:
            return p if c == 0 else a * self.inv(c) % p
        den = (c * x + d) % p
        if den == 0:
            return p
        return (a * x + b) * self.inv(den) % p


def symmetric_family(n: int, cap: int = MATERIALIZATION_CAP) -> PermFamily:
    size = factorial(n)
    if size > cap:
        raise CapExceeded(f"the symmetric group S_{n}", size, cap)
    return PermFamily.explicit((Permutation(p, check=False) for p in permutations(range(n))), degree=n, label=f"S_{n}")


def alternating_family(n: int, cap: int = MATERIALIZATION_CAP) -> PermFamily:
    if n < 3:
        raise ValueError(f"the alternating group needs n > 2, got n={n}")
    size = factorial(n) // 2
    if size > cap:
        raise CapExceeded(f"the alternating group A_{n}", size, cap)
    perms = (Permutation(p, check=False) for p in permutations(range(n)) if parity(p) == 0)
    return PermFamily.explicit(perms, degree=n, label=f"A_{n}")


def cyclic_family(n: int) -> PermFamily:
    """Shifts x -> x + b (mod n); element b is the shift by b."""
    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")

    def gen(b: int) -> Permutation:
        return Permutation([(i + b) % n for i in range(n)], check=False)

    def batch(idx: np.ndarray) -> np.ndarray:
        return ((idx[:, None] + np.arange(n)) % n).astype(np.int64)

    return PermFamily.lazy(n, n, gen, batch, label=f"cyclic({n})")


def affine_family(p: int) -> PermFamily:
    """Maps x -> a x + b over GF(p), indexed as (a - 1) * p + b."""
    field = PrimeField(p)

    def gen(index: int) -> Permutation:
        a, b = divmod(index, p)
        a += 1
        return Permutation([(a * x + b) % p for x in range(p)], check=False)

    def batch(idx: np.ndarray) -> np.ndarray:
        a, b = np.divmod(idx, p)
        return ((a[:, None] + 1) * np.arange(p) + b[:, None]) % p

    return PermFamily.lazy(p, p * (p - 1), gen, batch, label=f"affine({field.p})")


def mobius_coefficients(p: int, index: int) -> tuple[int, int, int, int]:
    """Canonical (a, b, c, d) of the index-th element of PGL(2, p).

    The first nonzero coefficient is normalised to 1. Indices below
    p^2 (p - 1) have a = 1 and run over (b, c, d) with d != bc; the rest
    have a = 0, b = 1 and run over (c, d) with c != 0.
    """
    head = p * p * (p - 1)
    if index < head:
        b, rest = divmod(index, p * (p - 1))
        c, d = divmod(rest, p - 1)
        if d >= b * c % p:
            d += 1
        return 1, b, c, d
    c, d = divmod(index - head, p)
    return 0, 1, c + 1, d


def mobius_family(p: int) -> PermFamily:
    """All of PGL(2, p) acting on the projective line {0, ..., p}.

    This is the full projective group (ad - bc != 0), which is sharply
    3-transitive. For odd p the determinant-one subgroup alone is only
    half as large and is not 3-wise uniform.
    """
    field = PrimeField(p)
    size = (p + 1) * p * (p - 1)

    def gen(index: int) -> Permutation:
        a, b, c, d = mobius_coefficients(p, index)
        return Permutation([field.mobius(a, b, c, d, x) for x in range(p + 1)], check=False)

    return PermFamily.lazy(p + 1, size, gen, label=f"mobius({p})")


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    param: int
    degree: int
    strength: int
    size: int

    def construct(self, cap: int = MATERIALIZATION_CAP) -> PermFamily:
        if self.name == "symmetric":
            return symmetric_family(self.param, cap)
        if self.name == "alternating":
            return alternating_family(self.param, cap)
        if self.name == "cyclic":
            return cyclic_family(self.param)
        if self.name == "affine":
            return affine_family(self.param)
        if self.name == "mobius":
            return mobius_family(self.param)
        raise ValueError(f"unknown catalog family {self.name!r}")

    def __str__(self) -> str:
        return f"{self.name}({self.param})"


def catalog_candidates(n: int, t: int) -> list[CatalogEntry]:
    """Catalog families on degree n that are t-wise uniform, no construction.

    The trivial groups are offered only when nothing smaller can exist in
    the catalog's reach: S_n for t >= n - 1 and A_n for t == n - 2.
    A_n is exactly (n-2)-wise uniform; at t = n - 1 a query pins the
    whole permutation and only one of each even/odd pair lies in A_n.
    """
    if n < 1 or t < 1:
        raise ValueError(f"need n, t >= 1, got n={n}, t={t}")
    out = []
    if t == 1:
        out.append(CatalogEntry("cyclic", n, n, 1, n))
    if t <= 2 and is_prime(n):
        out.append(CatalogEntry("affine", n, n, 2, n * (n - 1)))
    if t <= 3 and is_prime(n - 1):
        p = n - 1
        out.append(CatalogEntry("mobius", p, n, 3, (p + 1) * p * (p - 1)))
    if n >= 3 and t == n - 2:
        out.append(CatalogEntry("alternating", n, n, n - 2, factorial(n) // 2))
    if t >= n - 1:
        out.append(CatalogEntry("symmetric", n, n, n, factorial(n)))
    return out


def best_entry(n: int, t: int) -> CatalogEntry | None:
    cands = catalog_candidates(n, t)
    # min() keeps the first of equal sizes, so list order breaks ties
    return min(cands, key=lambda e: e.size) if cands else None


def best_base(n: int, t: int, cap: int = MATERIALIZATION_CAP) -> PermFamily | None:
    """Smallest catalog family that is t-wise uniform on degree n, or None."""
    entry = best_entry(n, t)
    return entry.construct(cap) if entry is not None else None
