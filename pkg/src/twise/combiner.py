"""Design-based combination of permutation families and the recursive
schedule built on it.

Given a selection of n-subsets S of {0..2n-1}, a t-wise uniform family A
and a (2t+1)-wise uniform family B, both on degree n, every triple
(S, sigma, tau) yields the permutation

    mu(x) = tau(sigma(f(x)))      for x in S
    mu(x) = tau(g(x)) + n         for x not in S

where f and g number the elements of S and its complement in increasing
order. The resulting family on degree 2n is (2t+1)-wise uniform whenever
the selection has matching (2t+1)-wise statistics.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from math import comb, factorial

import numpy as np

from .base_families import CatalogEntry, best_entry
from .designs import Selection, check_selection, complete_selection
from .perm_core import (
    MATERIALIZATION_CAP,
    CapExceeded,
    Permutation,
    PermFamily,
    batch_indices_ok,
    identity,
    unrank_subset,
)


def make_mu(S: Sequence[int], sigma: Sequence[int], tau: Sequence[int]) -> Permutation:
    n = len(S)
    if len(sigma) != n or len(tau) != n:
        raise ValueError(f"|S|={n} but sigma has degree {len(sigma)} and tau has degree {len(tau)}")
    images = [0] * (2 * n)
    inside = [False] * (2 * n)
    prev = -1
    for x in S:
        if not prev < x < 2 * n:
            raise ValueError(f"S={tuple(S)} is not a sorted {n}-subset of 0..{2 * n - 1}")
        inside[x] = True
        prev = x
    r_in = r_out = 0
    for x in range(2 * n):
        if inside[x]:
            images[x] = tau[sigma[r_in]]
            r_in += 1
        else:
            images[x] = tau[r_out] + n
            r_out += 1
    return Permutation(images, check=False)


def _complement_rows(blocks: np.ndarray, v: int) -> np.ndarray:
    rows = np.arange(len(blocks))[:, None]
    mask = np.zeros((len(blocks), v), dtype=bool)
    mask[rows, blocks] = True
    return np.nonzero(~mask)[1].reshape(len(blocks), v - blocks.shape[1])


def combine(
    sel: Selection,
    A: PermFamily,
    B: PermFamily,
    t: int | None = None,
    paranoid: bool = False,
) -> PermFamily:
    """Lazy family of all mu(S, sigma, tau) over sel x A x B.

    Index i decomposes row-major as (S-index, sigma-index, tau-index).
    With ``paranoid`` the three hypotheses are checked exhaustively first;
    this needs ``t``.
    """
    n = A.degree
    if B.degree != n:
        raise ValueError(f"A has degree {A.degree} but B has degree {B.degree}")
    if sel.v != 2 * n or sel.k != n:
        raise ValueError(f"selection must hold {n}-subsets of a {2 * n}-set, got v={sel.v}, k={sel.k}")
    if paranoid:
        _check_hypotheses(sel, A, B, t)

    inner = A.size * B.size
    size = sel.size * inner

    def gen(index: int) -> Permutation:
        s, rest = divmod(index, inner)
        a, b = divmod(rest, B.size)
        return make_mu(sel.get(s), A.get(a), B.get(b))

    batch = None
    if batch_indices_ok(size):
        def batch(idx: np.ndarray) -> np.ndarray:
            s, rest = np.divmod(idx, inner)
            a, b = np.divmod(rest, B.size)
            inside = sel.take(s)
            outside = _complement_rows(inside, 2 * n)
            sigma = A.take(a).astype(np.int64)
            tau = B.take(b).astype(np.int64)
            rows = np.arange(len(idx))[:, None]
            out = np.empty((len(idx), 2 * n), dtype=np.int64)
            out[rows, inside] = np.take_along_axis(tau, sigma, axis=1)
            out[rows, outside] = tau + n
            return out

    return PermFamily.lazy(2 * n, size, gen, batch, label=f"combine({sel.label or sel.size},{A.label},{B.label})")


def _check_hypotheses(sel: Selection, A: PermFamily, B: PermFamily, t: int | None) -> None:
    from .verifier import check_uniform

    if t is None:
        raise ValueError("paranoid mode needs the strength t")
    n = A.degree
    if t > 0:
        rep = check_uniform(A, min(t, n))
        if not rep.passed:
            raise ValueError(f"A is not {t}-wise uniform: {rep.render()}")
    rep = check_uniform(B, min(2 * t + 1, n))
    if not rep.passed:
        raise ValueError(f"B is not {2 * t + 1}-wise uniform: {rep.render()}")
    srep = check_selection(sel, min(2 * t + 1, n))
    if not srep.passed:
        raise ValueError(f"selection fails at strength {2 * t + 1}: {srep.render()}")


# -- k groups --------------------------------------------------------------

class OrderedPartitionFamily:
    """Ordered partitions of {0..kn-1} into k blocks of size n.

    The complete family is indexed by iterated subset unranking: block 1
    is chosen among C(kn, n) subsets, block 2 among C(kn - n, n) subsets
    of what remains, and so on, with block 1 the most significant digit.
    """

    __slots__ = ("k", "n", "kn", "size", "_items", "_radices")

    def __init__(self, k: int, n: int, partitions: Sequence[Sequence[Sequence[int]]] | None = None):
        if k < 1 or n < 1:
            raise ValueError(f"need k, n >= 1, got k={k}, n={n}")
        self.k = k
        self.n = n
        self.kn = k * n
        self._radices = [comb((k - i) * n, n) for i in range(k)]
        if partitions is None:
            self._items = None
            self.size = factorial(self.kn) // factorial(n) ** k
        else:
            items = []
            for part in partitions:
                blocks = tuple(tuple(sorted(b)) for b in part)
                flat = sorted(x for b in blocks for x in b)
                if len(blocks) != k or any(len(b) != n for b in blocks) or flat != list(range(self.kn)):
                    raise ValueError(f"{part} is not an ordered partition of 0..{self.kn - 1} into {k} blocks of {n}")
                items.append(blocks)
            self._items = tuple(items)
            self.size = len(items)

    @classmethod
    def complete(cls, k: int, n: int) -> OrderedPartitionFamily:
        return cls(k, n)

    def get(self, index: int) -> tuple[tuple[int, ...], ...]:
        if not 0 <= index < self.size:
            raise IndexError(f"index {index} out of range for partition family of size {self.size}")
        if self._items is not None:
            return self._items[index]
        digits = []
        for radix in reversed(self._radices):
            index, d = divmod(index, radix)
            digits.append(d)
        digits.reverse()
        remaining = list(range(self.kn))
        blocks = []
        for d in digits[:-1]:
            picked = unrank_subset(len(remaining), self.n, d)
            chosen = set(picked)
            blocks.append(tuple(remaining[p] for p in picked))
            remaining = [x for j, x in enumerate(remaining) if j not in chosen]
        blocks.append(tuple(remaining))
        return tuple(blocks)

    __getitem__ = get

    def __iter__(self):
        return (self.get(i) for i in range(self.size))


def make_mu_k(blocks: Sequence[Sequence[int]], tau: Sequence[int], sigmas: Sequence[Sequence[int]]) -> Permutation:
    """Block 0 goes through tau onto 0..n-1; block i through tau∘sigma_i onto i*n.. ."""
    n = len(tau)
    images = [0] * (n * len(blocks))
    for r, x in enumerate(blocks[0]):
        images[x] = tau[r]
    for i, (block, sigma) in enumerate(zip(blocks[1:], sigmas), start=1):
        off = i * n
        for r, x in enumerate(block):
            images[x] = tau[sigma[r]] + off
    return Permutation(images, check=False)


def combine_k(
    part: OrderedPartitionFamily,
    tau_fam: PermFamily,
    sigma_fams: Sequence[PermFamily],
    t: int | None = None,
) -> PermFamily:
    """k-group generalisation of :func:`combine`.

    Index layout is row-major over (partition, tau, sigma_1, ..., sigma_{k-1}).
    """
    k, n = part.k, part.n
    if len(sigma_fams) != k - 1:
        raise ValueError(f"need {k - 1} sigma families for {k} groups, got {len(sigma_fams)}")
    for fam in (tau_fam, *sigma_fams):
        if fam.degree != n:
            raise ValueError(f"family {fam!r} has degree {fam.degree}, groups have size {n}")
    radices = [tau_fam.size] + [f.size for f in sigma_fams]
    inner = 1
    for r in radices:
        inner *= r
    size = part.size * inner

    def gen(index: int) -> Permutation:
        p_idx, rest = divmod(index, inner)
        digits = []
        for r in reversed(radices):
            rest, d = divmod(rest, r)
            digits.append(d)
        digits.reverse()
        tau = tau_fam.get(digits[0])
        sigmas = [f.get(d) for f, d in zip(sigma_fams, digits[1:])]
        return make_mu_k(part.get(p_idx), tau, sigmas)

    return PermFamily.lazy(k * n, size, gen, label=f"combine_k({k},{n})")


# -- plans -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RecursionPlan:
    """A construction tree with exact sizes.

    ``kind`` is "base", "combine" or "combine_k". For "combine" the
    children are (A-plan at strength (t-1)/2, B-plan at strength t) on
    half the degree; for "combine_k" they are (tau plan, sigma plans...).
    ``selection`` is None for the complete selection / partition family.
    """

    kind: str
    n: int
    t: int
    size: int
    base: CatalogEntry | None = None
    selection: Selection | None = None
    selection_size: int = 0
    k: int = 2
    children: tuple[RecursionPlan, ...] = field(default=())

    def render(self, indent: int = 0) -> str:
        pad = "  " * indent
        if self.kind == "base":
            line = f"{pad}base {self.base} n={self.n} t={self.t} size={self.size}"
        elif self.kind == "combine":
            sel = "complete" if self.selection is None else "custom"
            line = f"{pad}combine n={self.n} t={self.t} size={self.size} selection={sel}({self.selection_size})"
        else:
            line = f"{pad}combine_k k={self.k} n={self.n} t={self.t} size={self.size} partitions={self.selection_size}"
        return "\n".join([line] + [c.render(indent + 1) for c in self.children])


def _is_pow2(x: int) -> bool:
    return x >= 1 and x & (x - 1) == 0


def _base(entry: CatalogEntry, t: int) -> RecursionPlan:
    return RecursionPlan("base", entry.degree, t, entry.size, base=entry)


def _identity_plan(n: int) -> RecursionPlan:
    return RecursionPlan("base", n, 0, 1, base=CatalogEntry("identity", n, n, 0, 1))


def _symmetric(n: int, t: int) -> RecursionPlan:
    return _base(CatalogEntry("symmetric", n, n, n, factorial(n)), t)


def _plan(n: int, t: int, use_catalog: bool) -> RecursionPlan:
    if t >= n:
        return _symmetric(n, t)
    if t == 1:
        return _base(CatalogEntry("cyclic", n, n, 1, n), t)
    if use_catalog:
        entry = best_entry(n, t)
        if entry is not None:
            return _base(entry, t)
    return _combine_node(n, t, use_catalog, None)


def _child(n: int, t: int, use_catalog: bool) -> RecursionPlan:
    """Plan for an arbitrary (n, t) child; falls back to the catalog."""
    if t == 0:
        return _identity_plan(n)
    if t >= n:
        return _symmetric(n, t)
    if _is_pow2(n) and n >= 2 and _is_pow2(t + 1):
        return _plan(n, t, use_catalog)
    entry = best_entry(n, t)
    if entry is None:
        raise ValueError(f"no construction known for degree {n} at strength {t}")
    return _base(entry, t)


def _combine_node(n: int, t: int, use_catalog: bool, selection: Selection | None) -> RecursionPlan:
    half = n // 2
    left = _child(half, (t - 1) // 2, use_catalog)
    right = _child(half, t, use_catalog)
    sel_size = comb(n, half) if selection is None else selection.size
    return RecursionPlan(
        "combine", n, t, sel_size * left.size * right.size,
        selection=selection, selection_size=sel_size, children=(left, right),
    )


def plan(n: int, t: int, use_catalog: bool = True, selection: Selection | None = None) -> RecursionPlan:
    """Recursive schedule for a t-wise uniform family on degree n.

    Needs n = 2^m (m >= 1) and t = 2^l - 1 (l >= 1). A custom
    ``selection`` replaces the complete selection at the top combine step
    only; the form constraints are then relaxed to n even, t odd.
    """
    if selection is not None:
        if n % 2 or t % 2 == 0 or t < 1:
            raise ValueError(f"a custom selection needs an even degree and odd strength, got n={n}, t={t}")
        if selection.v != n or selection.k != n // 2:
            raise ValueError(f"selection must hold {n // 2}-subsets of a {n}-set, got v={selection.v}, k={selection.k}")
        return _combine_node(n, t, use_catalog, selection)
    if not (_is_pow2(n) and n >= 2):
        raise ValueError(f"n must be a power of two 2^m with m >= 1, got {n}")
    if not (t >= 1 and _is_pow2(t + 1)):
        raise ValueError(f"t must have the form 2^l - 1 with l >= 1, got {t}")
    return _plan(n, t, use_catalog)


def plan_k(k: int, n: int, t: int, use_catalog: bool = True) -> RecursionPlan:
    """One k-group step: (2t+1)-wise uniform on degree k*n from the complete partition family."""
    if k < 2:
        raise ValueError(f"need k >= 2, got {k}")
    tau = _child(n, 2 * t + 1, use_catalog)
    sigma = _child(n, t, use_catalog)
    parts = factorial(k * n) // factorial(n) ** k
    return RecursionPlan(
        "combine_k", k * n, 2 * t + 1, parts * tau.size * sigma.size ** (k - 1),
        selection_size=parts, k=k, children=(tau,) + (sigma,) * (k - 1),
    )


def build(p: RecursionPlan, cap: int | None = None, base_cap: int = MATERIALIZATION_CAP) -> PermFamily:
    """Lazy family realising the plan.

    ``cap`` bounds the total plan size; ``base_cap`` bounds materialised
    base families such as S_n.
    """
    if cap is not None and p.size > cap:
        raise CapExceeded(f"building a family on degree {p.n} at strength {p.t}", p.size, cap)
    if p.kind == "base":
        if p.base.name == "identity":
            return PermFamily.explicit([identity(p.n)], label="identity")
        fam = p.base.construct(base_cap)
    elif p.kind == "combine":
        sel = p.selection if p.selection is not None else complete_selection(p.n)
        fam = combine(sel, build(p.children[0], base_cap=base_cap), build(p.children[1], base_cap=base_cap))
    else:
        tau, *sigmas = (build(c, base_cap=base_cap) for c in p.children)
        fam = combine_k(OrderedPartitionFamily.complete(p.k, p.n // p.k), tau, sigmas)
    assert fam.size == p.size and fam.degree == p.n
    return fam


# -- size accounting -------------------------------------------------------

def naive_size(n: int, t: int) -> int:
    """Size from the naive recursion: two t-wise halves per split."""
    if t >= n:
        return factorial(n)
    return comb(n, n // 2) * naive_size(n // 2, t) ** 2


@dataclass(frozen=True)
class SizeRow:
    m: int
    l: int
    n: int
    t: int
    improved: int
    naive: int
    bound: int
    factorial: int


def size_table(max_m: int, max_l: int) -> list[SizeRow]:
    """Improved vs naive recursion sizes for n = 2^m, t = 2^l - 1, l >= 2."""
    rows = []
    for m in range(1, max_m + 1):
        n = 2**m
        for l in range(2, max_l + 1):
            t = 2**l - 1
            rows.append(SizeRow(m, l, n, t, plan(n, t, use_catalog=False).size, naive_size(n, t), t ** (2 * n), factorial(n)))
    return rows


def render_size_table(rows: Sequence[SizeRow]) -> str:
    header = ("m", "l", "n", "t", "improved", "naive", "t^(2n)", "n!")
    body = [tuple(map(str, (r.m, r.l, r.n, r.t, r.improved, r.naive, r.bound, r.factorial))) for r in rows]
    widths = [max(len(h), *(len(b[i]) for b in body)) if body else len(h) for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    lines += ["  ".join(c.rjust(w) for c, w in zip(b, widths)) for b in body]
    return "\n".join(lines)
