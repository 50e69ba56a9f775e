"""Selections (families of k-subsets), t-design certification, the
selection-statistics check, and a small exhaustive design search."""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import comb
from typing import TextIO

import numpy as np

from .perm_core import (
    MATERIALIZATION_CAP,
    CapExceeded,
    FormatError,
    _parse_header,
    unrank_subset,
)

SEARCH_MAX_V = 14
_TABLE_LIMIT = 1 << 17


class Selection:
    """A multiset of sorted k-subsets of {0, ..., v-1}."""

    __slots__ = ("v", "k", "size", "label", "_blocks", "_gen", "_table")

    def __init__(self, v: int, k: int, size: int, *, blocks=None, gen=None, label: str = ""):
        if not 0 <= k <= v:
            raise ValueError(f"need 0 <= k <= v, got v={v}, k={k}")
        if (blocks is None) == (gen is None):
            raise ValueError("exactly one of blocks or gen must be given")
        self.v = v
        self.k = k
        self.size = size
        self.label = label
        self._blocks = blocks
        self._gen = gen
        self._table = None

    @classmethod
    def explicit(cls, v: int, k: int, blocks: Iterable[Sequence[int]], label: str = "") -> Selection:
        out = []
        for i, b in enumerate(blocks):
            block = tuple(sorted(b))
            if len(block) != k or len(set(block)) != k or (block and not 0 <= block[0] <= block[-1] < v):
                raise ValueError(f"block {i} {tuple(b)} is not a {k}-subset of 0..{v - 1}")
            out.append(block)
        return cls(v, k, len(out), blocks=tuple(out), label=label)

    @property
    def is_lazy(self) -> bool:
        return self._gen is not None

    def get(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for selection of size {self.size}")
        if self._blocks is not None:
            return self._blocks[index]
        return self._gen(index)

    __getitem__ = get

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        if self._blocks is not None:
            return iter(self._blocks)
        return (self._gen(i) for i in range(self.size))

    def __repr__(self) -> str:
        return f"<Selection {self.label or ''} v={self.v} k={self.k} size={self.size}>"

    def materialize(self, cap: int = MATERIALIZATION_CAP) -> list[tuple[int, ...]]:
        if self.size > cap:
            raise CapExceeded("materializing the selection", self.size, cap)
        return list(self)

    def take(self, indices: np.ndarray) -> np.ndarray:
        """Block rows for an array of indices, shape ``(len(indices), k)``."""
        indices = np.asarray(indices, dtype=np.int64)
        if self._blocks is not None or self.size <= _TABLE_LIMIT:
            if self._table is None:
                arr = np.array(list(self), dtype=np.int64).reshape(self.size, self.k)
                arr.setflags(write=False)
                self._table = arr
            return self._table[indices]
        return np.array([self._gen(i) for i in indices.tolist()], dtype=np.int64).reshape(len(indices), self.k)


def complete_selection(two_n: int) -> Selection:
    """All n-subsets of {0, ..., 2n-1}, lazily, in lexicographic order."""
    if two_n < 2 or two_n % 2:
        raise ValueError(f"complete selection needs an even size >= 2, got {two_n}")
    n = two_n // 2
    size = comb(two_n, n)
    return Selection(two_n, n, size, gen=lambda r: unrank_subset(two_n, n, r), label=f"complete({two_n})")


def _masks(sel: Selection, cap: int) -> list[int]:
    if sel.size > cap:
        raise CapExceeded("materializing the selection", sel.size, cap)
    out = []
    for block in sel:
        m = 0
        for x in block:
            m |= 1 << x
        out.append(m)
    return out


@dataclass(frozen=True)
class DesignCertificate:
    """Outcome of checking the t-design property.

    ``lam`` is the common containment count, or None when the counts
    differ; then ``witness`` has ``witness_count`` blocks while the first
    t-subset ``reference`` has ``reference_count``.
    """

    t: int
    lam: int | None
    reference: tuple[int, ...] = ()
    reference_count: int = 0
    witness: tuple[int, ...] | None = None
    witness_count: int | None = None

    @property
    def passed(self) -> bool:
        return self.lam is not None

    def render(self) -> str:
        if self.passed:
            return f"design t={self.t} lambda={self.lam} verdict=pass"
        return (
            f"design t={self.t} lambda=absent verdict=fail "
            f"witness={_fmt(self.witness)} count={self.witness_count} "
            f"reference={_fmt(self.reference)} count={self.reference_count}"
        )


def _fmt(xs) -> str:
    return "{" + ",".join(map(str, xs)) + "}"


def certify_design(sel: Selection, t: int, cap: int = MATERIALIZATION_CAP) -> DesignCertificate:
    if not 1 <= t <= sel.k:
        raise ValueError(f"need 1 <= t <= k={sel.k}, got t={t}")
    masks = _masks(sel, cap)
    reference = None
    ref_count = 0
    for subset in combinations(range(sel.v), t):
        m = sum(1 << x for x in subset)
        count = sum(1 for b in masks if b & m == m)
        if reference is None:
            reference, ref_count = subset, count
        elif count != ref_count:
            return DesignCertificate(t, None, reference, ref_count, subset, count)
    return DesignCertificate(t, ref_count, reference, ref_count)


@dataclass(frozen=True)
class SelectionReport:
    """Exact comparison of block statistics against a uniform k-subset.

    For every t-subset I and J ⊆ I the frequency of blocks containing J
    and avoiding I \\ J must be C(v-t, k-|J|) / C(v, k).
    """

    t: int
    passed: bool
    queries_checked: int
    witness_points: tuple[int, ...] | None = None
    witness_inside: tuple[int, ...] | None = None
    observed: Fraction | None = None
    expected: Fraction | None = None

    def render(self) -> str:
        head = f"selection t={self.t} verdict={'pass' if self.passed else 'fail'} queries={self.queries_checked}"
        if self.passed:
            return head
        return (
            f"{head} witness I={_fmt(self.witness_points)} J={_fmt(self.witness_inside)} "
            f"observed={self.observed} expected={self.expected}"
        )


def check_selection(sel: Selection, t: int, cap: int = MATERIALIZATION_CAP) -> SelectionReport:
    v, k = sel.v, sel.k
    if not 1 <= t <= k:
        raise ValueError(f"need 1 <= t <= k={k}, got t={t}")
    masks = _masks(sel, cap)
    total = comb(v, k)
    checked = 0
    for points in combinations(range(v), t):
        imask = sum(1 << x for x in points)
        hits = Counter(b & imask for b in masks)
        for m in range(t + 1):
            # count * C(v,k) == |sel| * C(v-t, k-m), cross-multiplied
            target = sel.size * comb(v - t, k - m)
            for inside in combinations(points, m):
                checked += 1
                jmask = sum(1 << x for x in inside)
                if hits.get(jmask, 0) * total != target:
                    return SelectionReport(
                        t, False, checked, points, inside,
                        Fraction(hits.get(jmask, 0), sel.size) if sel.size else Fraction(0),
                        Fraction(comb(v - t, k - m), total),
                    )
    return SelectionReport(t, True, checked)


def design_lower_bound(two_n: int, t: int) -> int:
    """Ray-Chaudhuri-Wilson bound on the size of a t-(2n, n, λ) design."""
    if t < 1:
        raise ValueError(f"t must be positive, got {t}")
    if t % 2 == 0:
        return comb(two_n, t // 2)
    return 2 * comb(two_n - 1, (t - 1) // 2)


def search_design(
    v: int, k: int, t: int, max_blocks: int, cap_v: int = SEARCH_MAX_V
) -> Selection | None:
    """Smallest proper sub-multiset of all k-subsets forming a t-design.

    Sizes are tried in increasing order and, within a size, multisets of
    blocks in lexicographic order; the first hit is returned. A size b is
    skipped unless b C(k,i) is divisible by C(v,i) for every i <= t, and
    branches are cut once some t-subset exceeds the forced
    λ = b C(k,t) / C(v,t). Still exponential, so ``v`` is capped.
    """
    if v > cap_v:
        raise CapExceeded("design search over the ground set", v, cap_v)
    if not 1 <= t <= k <= v:
        raise ValueError(f"need 1 <= t <= k <= v, got v={v}, k={k}, t={t}")
    blocks = list(combinations(range(v), k))
    tsubsets = [sum(1 << x for x in s) for s in combinations(range(v), t)]
    incidence = []
    for b in blocks:
        m = sum(1 << x for x in b)
        incidence.append([j for j, ts in enumerate(tsubsets) if m & ts == ts])

    def dfs(start: int, left: int, counts: list[int], lam: int, chosen: list[int]) -> list[int] | None:
        if left == 0:
            return list(chosen) if all(c == lam for c in counts) else None
        for i in range(start, len(blocks)):
            cover = incidence[i]
            if any(counts[j] >= lam for j in cover):
                continue
            for j in cover:
                counts[j] += 1
            chosen.append(i)
            hit = dfs(i, left - 1, counts, lam, chosen)
            chosen.pop()
            for j in cover:
                counts[j] -= 1
            if hit is not None:
                return hit
        return None

    for size in range(1, min(max_blocks, len(blocks) - 1) + 1):
        if any(size * comb(k, i) % comb(v, i) for i in range(1, t + 1)):
            continue
        lam = size * comb(k, t) // comb(v, t)
        hit = dfs(0, size, [0] * len(tsubsets), lam, [])
        if hit is not None:
            return Selection.explicit(v, k, (blocks[i] for i in hit), label=f"search({v},{k},{t})")
    return None


# -- text format -----------------------------------------------------------

def write_selection(sel: Selection, out: TextIO, cap: int = MATERIALIZATION_CAP) -> None:
    if sel.size > cap:
        raise CapExceeded("exporting the selection", sel.size, cap)
    out.write(f"selection v1 v={sel.v} k={sel.k} size={sel.size}\n")
    for block in sel:
        out.write(" ".join(map(str, block)))
        out.write("\n")


def read_selection(src: TextIO) -> Selection:
    lines = src.read().splitlines()
    if not lines:
        raise FormatError(1, "empty input")
    header = _parse_header(lines[0], "selection", ("v", "k", "size"))
    v, k, size = header["v"], header["k"], header["size"]
    if not 0 <= k <= v:
        raise FormatError(1, f"need 0 <= k <= v, got v={v}, k={k}")
    body = lines[1:]
    if len(body) != size:
        raise FormatError(len(lines), f"header declares {size} blocks, found {len(body)}")
    blocks = []
    for lineno, line in enumerate(body, start=2):
        try:
            block = tuple(int(tok) for tok in line.split())
        except ValueError:
            raise FormatError(lineno, "non-integer element") from None
        if len(block) != k:
            raise FormatError(lineno, f"expected {k} elements, found {len(block)}")
        if any(not 0 <= x < v for x in block) or list(block) != sorted(set(block)):
            raise FormatError(lineno, f"block must be strictly increasing within 0..{v - 1}")
        blocks.append(block)
    return Selection(v, k, size, blocks=tuple(blocks))

