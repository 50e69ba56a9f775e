"""Permutations, subset ranking, and permutation families.

Elements are 0-based throughout: a permutation of degree n acts on
{0, ..., n-1} and is stored as its image table.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Iterator, Sequence
from math import comb
from typing import TextIO

import numpy as np

MATERIALIZATION_CAP = 10_000_000

# numpy fast paths need indices that fit in int64
_INT64_SAFE = 2**62
_CHUNK = 1 << 16


class CapExceeded(RuntimeError):
    """Raised when a request would enumerate more than an allowed amount."""

    def __init__(self, what: str, required: int, cap: int):
        self.required = required
        self.cap = cap
        super().__init__(f"{what} requires {required} but the cap is {cap}")


class FormatError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class Permutation(tuple):
    """A bijection of {0, ..., n-1}, stored as the tuple of images.

    ``p[x]`` is the value ``x`` is mapped to. Being a tuple, permutations
    hash, compare and sort by their image sequence.
    """

    __slots__ = ()

    def __new__(cls, images: Iterable[int], check: bool = True) -> Permutation:
        self = super().__new__(cls, images)
        if check:
            n = len(self)
            if n < 1:
                raise ValueError("permutation degree must be at least 1")
            seen = [False] * n
            for v in self:
                if not (0 <= v < n) or seen[v]:
                    raise ValueError(f"{tuple(self)} is not a permutation of 0..{n - 1}")
                seen[v] = True
        return self

    @property
    def n(self) -> int:
        return len(self)

    def __call__(self, x: int) -> int:
        return self[x]

    def __repr__(self) -> str:
        return f"Permutation({list(self)})"


def identity(n: int) -> Permutation:
    if n < 1:
        raise ValueError(f"degree must be positive, got {n}")
    return Permutation(range(n), check=False)


def compose(outer: Sequence[int], inner: Sequence[int]) -> Permutation:
    """Return ``outer ∘ inner``, i.e. ``x -> outer(inner(x))``."""
    if len(outer) != len(inner):
        raise ValueError(f"degree mismatch: outer has degree {len(outer)}, inner has degree {len(inner)}")
    return Permutation([outer[y] for y in inner], check=False)


def inverse(p: Sequence[int]) -> Permutation:
    inv = [0] * len(p)
    for x, y in enumerate(p):
        inv[y] = x
    return Permutation(inv, check=False)


def parity(p: Sequence[int]) -> int:
    """0 for even permutations, 1 for odd ones (via cycle count)."""
    n = len(p)
    seen = [False] * n
    cycles = 0
    for start in range(n):
        if not seen[start]:
            cycles += 1
            x = start
            while not seen[x]:
                seen[x] = True
                x = p[x]
    return (n - cycles) % 2


def falling_factorial(n: int, t: int) -> int:
    """n (n-1) ... (n-t+1): the number of ordered t-tuples of distinct points."""
    out = 1
    for i in range(t):
        out *= n - i
    return out


def unrank_subset(v: int, k: int, rank: int) -> tuple[int, ...]:
    """The ``rank``-th k-subset of {0..v-1} in lexicographic order of sorted tuples."""
    if v < 1 or not 0 <= k <= v:
        raise ValueError(f"need 0 <= k <= v and v >= 1, got v={v}, k={k}")
    total = comb(v, k)
    if not 0 <= rank < total:
        raise IndexError(f"rank {rank} out of range: must satisfy 0 <= rank < C({v},{k}) = {total}")
    out = []
    c = 0
    for pos in range(k):
        remaining = k - pos - 1
        while True:
            block = comb(v - c - 1, remaining)
            if rank < block:
                break
            rank -= block
            c += 1
        out.append(c)
        c += 1
    return tuple(out)


def rank_subset(v: int, subset: Sequence[int]) -> int:
    """Inverse of :func:`unrank_subset`; ``subset`` must be sorted."""
    k = len(subset)
    rank = 0
    prev = -1
    for pos, x in enumerate(subset):
        if not prev < x < v:
            raise ValueError(f"{tuple(subset)} is not a sorted subset of 0..{v - 1}")
        for c in range(prev + 1, x):
            rank += comb(v - c - 1, k - pos - 1)
        prev = x
    return rank


def _dtype_for(n: int) -> np.dtype:
    if n <= 256:
        return np.dtype(np.uint8)
    if n <= 65536:
        return np.dtype(np.uint16)
    return np.dtype(np.int64)


class PermFamily:
    """A multiset of permutations of a common degree.

    The family is either explicit (a stored list, duplicates allowed) or
    lazy (a pure ``index -> Permutation`` function plus an exact size).
    Sizes are Python ints and may be far beyond 64 bits. Lazy families
    may also carry a vectorised ``batch`` function mapping an int64 index
    array to an ``(len, degree)`` image array; it must agree with ``gen``.
    """

    __slots__ = ("degree", "size", "label", "_items", "_gen", "_batch", "_array")

    def __init__(
        self,
        degree: int,
        size: int,
        *,
        items: Sequence[Permutation] | None = None,
        gen: Callable[[int], Permutation] | None = None,
        batch: Callable[[np.ndarray], np.ndarray] | None = None,
        label: str = "",
    ):
        if degree < 1:
            raise ValueError(f"family degree must be positive, got {degree}")
        if size < 0:
            raise ValueError(f"family size must be non-negative, got {size}")
        if (items is None) == (gen is None):
            raise ValueError("exactly one of items or gen must be given")
        self.degree = degree
        self.size = size
        self.label = label
        self._items = items
        self._gen = gen
        self._batch = batch
        self._array = None

    @classmethod
    def explicit(cls, perms: Iterable[Sequence[int]], degree: int | None = None, label: str = "") -> PermFamily:
        items = [p if isinstance(p, Permutation) else Permutation(p) for p in perms]
        if degree is None:
            if not items:
                raise ValueError("degree is required for an empty family")
            degree = items[0].n
        for i, p in enumerate(items):
            if p.n != degree:
                raise ValueError(f"element {i} has degree {p.n}, family degree is {degree}")
        return cls(degree, len(items), items=tuple(items), label=label)

    @classmethod
    def lazy(
        cls,
        degree: int,
        size: int,
        gen: Callable[[int], Permutation],
        batch: Callable[[np.ndarray], np.ndarray] | None = None,
        label: str = "",
    ) -> PermFamily:
        return cls(degree, size, gen=gen, batch=batch, label=label)

    @property
    def is_lazy(self) -> bool:
        return self._gen is not None

    def get(self, index: int) -> Permutation:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for family of size {self.size}")
        if self._items is not None:
            return self._items[index]
        return self._gen(index)

    __getitem__ = get

    def __iter__(self) -> Iterator[Permutation]:
        if self._items is not None:
            return iter(self._items)
        return (self._gen(i) for i in range(self.size))

    def __repr__(self) -> str:
        kind = "lazy" if self.is_lazy else "explicit"
        name = f" {self.label}" if self.label else ""
        return f"<PermFamily{name} {kind} degree={self.degree} size={self.size}>"

    def materialize(self, cap: int = MATERIALIZATION_CAP) -> list[Permutation]:
        if self.size > cap:
            raise CapExceeded("materializing the family", self.size, cap)
        return list(self)

    def to_explicit(self, cap: int = MATERIALIZATION_CAP) -> PermFamily:
        if not self.is_lazy:
            return self
        return PermFamily(self.degree, self.size, items=tuple(self.materialize(cap)), label=self.label)

    def take(self, indices: np.ndarray) -> np.ndarray:
        """Image rows for an array of indices, shape ``(len(indices), degree)``."""
        indices = np.asarray(indices, dtype=np.int64)
        if indices.size and (indices.min() < 0 or indices.max() >= self.size):
            raise IndexError(f"indices out of range for family of size {self.size}")
        if self._items is not None or self._array is not None:
            return self._as_array()[indices]
        if self._batch is not None:
            return self._batch(indices)
        out = np.empty((len(indices), self.degree), dtype=_dtype_for(self.degree))
        for row, i in enumerate(indices.tolist()):
            out[row] = self._gen(i)
        return out

    def _as_array(self) -> np.ndarray:
        if self._array is None:
            if self._items is not None:
                arr = np.array(self._items, dtype=_dtype_for(self.degree)).reshape(self.size, self.degree)
            else:
                arr = np.empty((self.size, self.degree), dtype=_dtype_for(self.degree))
                for lo in range(0, self.size, _CHUNK):
                    hi = min(lo + _CHUNK, self.size)
                    arr[lo:hi] = self.take(np.arange(lo, hi, dtype=np.int64))
            arr.setflags(write=False)
            self._array = arr
        return self._array

    def to_array(self, cap: int = MATERIALIZATION_CAP) -> np.ndarray:
        """All elements as a read-only ``(size, degree)`` array, cached."""
        if self.size > cap:
            raise CapExceeded("materializing the family", self.size, cap)
        return self._as_array()


def explicit(perms: Iterable[Sequence[int]], degree: int | None = None) -> PermFamily:
    return PermFamily.explicit(perms, degree)


def family_get(fam: PermFamily, index: int) -> Permutation:
    return fam.get(index)


def batch_indices_ok(size: int) -> bool:
    return size < _INT64_SAFE


# -- text format -----------------------------------------------------------

def write_family(fam: PermFamily, out: TextIO, cap: int = MATERIALIZATION_CAP) -> None:
    if fam.size > cap:
        raise CapExceeded("exporting the family", fam.size, cap)
    out.write(f"permfamily v1 n={fam.degree} size={fam.size}\n")
    for p in fam:
        out.write(" ".join(map(str, p)))
        out.write("\n")


def _parse_header(line: str, magic: str, keys: Sequence[str]) -> dict[str, int]:
    parts = line.split()
    if parts[:2] != [magic, "v1"] or len(parts) != 2 + len(keys):
        raise FormatError(1, f"expected header '{magic} v1 {' '.join(k + '=<int>' for k in keys)}'")
    values = {}
    for key, part in zip(keys, parts[2:]):
        name, _, raw = part.partition("=")
        if name != key or not raw.isdigit():
            raise FormatError(1, f"malformed header field {part!r}, expected {key}=<int>")
        values[key] = int(raw)
    return values


def read_family(src: TextIO) -> PermFamily:
    lines = src.read().splitlines()
    if not lines:
        raise FormatError(1, "empty input")
    header = _parse_header(lines[0], "permfamily", ("n", "size"))
    n, size = header["n"], header["size"]
    if n < 1:
        raise FormatError(1, "n must be positive")
    body = lines[1:]
    if len(body) != size:
        raise FormatError(len(lines), f"header declares {size} permutations, found {len(body)}")
    perms = []
    for lineno, line in enumerate(body, start=2):
        try:
            images = [int(tok) for tok in line.split()]
        except ValueError:
            raise FormatError(lineno, "non-integer image") from None
        if len(images) != n:
            raise FormatError(lineno, f"expected {n} images, found {len(images)}")
        try:
            perms.append(Permutation(images))
        except ValueError as exc:
            raise FormatError(lineno, str(exc)) from None
    return PermFamily.explicit(perms, degree=n)
