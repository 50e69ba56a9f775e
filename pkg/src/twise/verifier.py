"""Exact and sampled verification of t-wise uniformity, and the joint
statistics check for pairs (tau∘sigma, tau).

A multiset T of permutations of {0..n-1} is t-wise uniform when, for
all distinct positions i_1..i_t and distinct targets j_1..j_t,

    |{p in T : p(i_m) = j_m for all m}| * n(n-1)...(n-t+1) == |T|.

Every exact check here compares integer counts by cross-multiplication.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations, product
from math import factorial

import numpy as np

from .perm_core import MATERIALIZATION_CAP, CapExceeded, PermFamily, batch_indices_ok, falling_factorial

WORK_CAP = 2_000_000_000


@dataclass(frozen=True)
class TupleQuery:
    positions: tuple[int, ...]
    targets: tuple[int, ...]

    def __post_init__(self):
        if len(self.positions) != len(self.targets):
            raise ValueError("positions and targets must have equal length")
        if len(set(self.positions)) != len(self.positions) or len(set(self.targets)) != len(self.targets):
            raise ValueError("positions and targets must each be distinct")

    def __str__(self) -> str:
        return ",".join(map(str, self.positions)) + "->" + ",".join(map(str, self.targets))


@dataclass(frozen=True)
class UniformityReport:
    t: int
    degree: int
    family_size: int
    passed: bool
    queries_checked: int
    expected_count: int | None  # None when (n)_t does not divide |T|
    min_count: int
    max_count: int
    worst_query: TupleQuery | None = None
    worst_count: int | None = None

    @property
    def expected(self) -> Fraction:
        return Fraction(1, falling_factorial(self.degree, self.t))

    @property
    def worst_deviation(self) -> Fraction:
        if self.worst_count is None:
            return Fraction(0)
        return abs(Fraction(self.worst_count, self.family_size) - self.expected)

    def render(self) -> str:
        e = self.expected
        parts = [
            f"verdict={'pass' if self.passed else 'fail'}",
            f"t={self.t}",
            f"expected={e.numerator}/{e.denominator}",
            f"worst={self.worst_deviation}",
            f"witness={self.worst_query if self.worst_query is not None else 'none'}",
        ]
        if self.worst_count is not None:
            parts.append(f"count={self.worst_count}")
        expected_count = "non-integral" if self.expected_count is None else str(self.expected_count)
        parts += [f"expected_count={expected_count}", f"size={self.family_size}", f"queries={self.queries_checked}"]
        return " ".join(parts)


def _radix(n: int, t: int) -> np.ndarray | None:
    if n**t >= 2**62:
        return None
    return np.array([n ** (t - 1 - m) for m in range(t)], dtype=np.int64)


def _decode(code: int, n: int, t: int) -> tuple[int, ...]:
    out = []
    for _ in range(t):
        code, d = divmod(code, n)
        out.append(d)
    return tuple(reversed(out))


def _tally(cols: np.ndarray, radix: np.ndarray | None) -> tuple[np.ndarray, np.ndarray]:
    """Distinct observed image tuples, in lexicographic order, with counts.

    Tuples come back as int64 codes when a radix is given, else as rows.
    """
    if radix is not None:
        return np.unique(cols.astype(np.int64) @ radix, return_counts=True)
    return np.unique(cols, axis=0, return_counts=True)


def _as_tuples(observed: np.ndarray, n: int, t: int) -> list[tuple[int, ...]]:
    if observed.ndim == 1:
        return [_decode(int(c), n, t) for c in observed]
    return [tuple(int(x) for x in r) for r in observed]


def _first_missing(observed: Sequence[tuple[int, ...]], n: int, t: int) -> tuple[int, ...]:
    # observed is sorted and every observed tuple is distinct-valued, so it
    # aligns with lexicographic enumeration up to the first gap
    for idx, cand in enumerate(permutations(range(n), t)):
        if idx >= len(observed) or observed[idx] != cand:
            return cand
    raise AssertionError("no missing target")


@dataclass(frozen=True)
class _TupleOutcome:
    ok: bool
    min_count: int
    max_count: int
    worst_targets: tuple[int, ...] | None = None
    worst_count: int | None = None


def _check_positions(arr: np.ndarray, positions: tuple[int, ...], n: int, nt: int, radix) -> _TupleOutcome:
    size = arr.shape[0]
    observed, counts = _tally(arr[:, positions], radix)
    full = len(counts) == nt
    lo = int(counts.min()) if full else 0
    hi = int(counts.max()) if len(counts) else 0
    if full and lo == hi and lo * nt == size:
        return _TupleOutcome(True, lo, hi)
    targets = _as_tuples(observed, n, len(positions))
    counts = counts.tolist()
    # worst |count * nt - size|, ties to the lexicographically first target
    best_dev, best_targets, best_count = -1, None, None
    for tgt, c in zip(targets, counts):
        dev = abs(c * nt - size)
        if dev > best_dev:
            best_dev, best_targets, best_count = dev, tgt, c
    if not full:
        missing = _first_missing(targets, n, len(positions))
        if size > best_dev or (size == best_dev and missing < best_targets):
            best_targets, best_count = missing, 0
    return _TupleOutcome(False, lo, hi, best_targets, best_count)


def check_uniform(
    fam: PermFamily,
    t: int,
    work_cap: int = WORK_CAP,
    workers: int = 1,
    cap: int = MATERIALIZATION_CAP,
) -> UniformityReport:
    """Exhaustive t-wise uniformity check.

    Position tuples are visited in lexicographic order; for each one the
    whole family is tallied and every target tuple, including unobserved
    ones, must occur exactly |T| / (n)_t times. Stops at the first failing
    position tuple and reports its worst target.
    """
    n = fam.degree
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n={n}, got t={t}")
    nt = falling_factorial(n, t)
    if fam.size * nt > work_cap:
        raise CapExceeded(f"exact {t}-wise verification (use sampled_check)", fam.size * nt, work_cap)
    size = fam.size
    expected_count = size // nt if size % nt == 0 else None
    arr = fam.to_array(cap)
    radix = _radix(n, t)
    pos_list = list(permutations(range(n), t))

    def run(chunk: Iterable[int]) -> tuple[int, _TupleOutcome] | tuple[None, tuple[int, int]]:
        lo, hi = None, None
        for idx in chunk:
            out = _check_positions(arr, pos_list[idx], n, nt, radix)
            if not out.ok:
                return idx, out
            lo = out.min_count if lo is None else min(lo, out.min_count)
            hi = out.max_count if hi is None else max(hi, out.max_count)
        return None, (lo, hi)

    if workers <= 1 or len(pos_list) < 2 * workers:
        results = [run(range(len(pos_list)))]
    else:
        step = -(-len(pos_list) // workers)
        chunks = [range(i, min(i + step, len(pos_list))) for i in range(0, len(pos_list), step)]
        with ThreadPoolExecutor(workers) as pool:
            results = list(pool.map(run, chunks))

    failures = [(idx, out) for idx, out in results if idx is not None]
    if failures:
        idx, out = min(failures, key=lambda f: f[0])
        return UniformityReport(
            t, n, size, False, (idx + 1) * nt, expected_count, out.min_count, out.max_count,
            TupleQuery(pos_list[idx], out.worst_targets), out.worst_count,
        )
    lows = [r[1][0] for r in results if r[1][0] is not None]
    highs = [r[1][1] for r in results if r[1][1] is not None]
    return UniformityReport(t, n, size, True, len(pos_list) * nt, expected_count, min(lows), max(highs))


# -- sampled ---------------------------------------------------------------

@dataclass(frozen=True)
class SampledReport:
    """Approximate check: the largest absolute gap between an empirical
    target frequency and 1/(n)_t over a fixed random set of positions."""

    t: int
    samples: int
    seed: int
    tol: float
    max_deviation: float
    worst_query: TupleQuery
    passed: bool

    def render(self) -> str:
        return (
            f"approximate verdict={'pass' if self.passed else 'fail'} t={self.t} samples={self.samples} "
            f"seed={self.seed} tol={self.tol} max_dev={self.max_deviation:.6f} witness={self.worst_query}"
        )


def sampled_check(
    fam: PermFamily, t: int, samples: int, seed: int, tol: float, queries: int = 16
) -> SampledReport:
    n = fam.degree
    if not 1 <= t <= n:
        raise ValueError(f"need 1 <= t <= n={n}, got t={t}")
    if samples < 1 or queries < 1:
        raise ValueError("samples and queries must be positive")
    rng = random.Random(seed)
    idx = [rng.randrange(fam.size) for _ in range(samples)]
    if batch_indices_ok(fam.size):
        arr = fam.take(np.array(idx, dtype=np.int64))
    else:
        arr = np.array([fam.get(i) for i in idx], dtype=np.int64)
    nt = falling_factorial(n, t)
    radix = _radix(n, t)
    p = 1.0 / nt
    worst, worst_q = -1.0, None
    for _ in range(queries):
        positions = tuple(rng.sample(range(n), t))
        observed, counts = _tally(arr[:, positions], radix)
        observed = _as_tuples(observed, n, t)
        for targets, c in zip(observed, counts.tolist()):
            dev = abs(c / samples - p)
            if dev > worst:
                worst, worst_q = dev, TupleQuery(positions, targets)
        if len(observed) < nt and p > worst:
            worst, worst_q = p, TupleQuery(positions, _first_missing(observed, n, t))
    return SampledReport(t, samples, seed, float(tol), worst, worst_q, worst <= float(tol))


# -- joint statistics of (tau∘sigma, tau) ---------------------------------

@dataclass(frozen=True)
class PairQuery:
    """(tau∘sigma)(i) = j on r points together with tau(k) = l on s points."""

    i: tuple[int, ...]
    j: tuple[int, ...]
    k: tuple[int, ...]
    l: tuple[int, ...]

    def __post_init__(self):
        if len(self.i) != len(self.j) or len(self.k) != len(self.l):
            raise ValueError("i/j and k/l must have matching lengths")
        for name in ("i", "j", "k", "l"):
            xs = getattr(self, name)
            if len(set(xs)) != len(xs):
                raise ValueError(f"{name}-indices must be distinct, got {xs}")

    @property
    def r(self) -> int:
        return len(self.i)

    @property
    def s(self) -> int:
        return len(self.k)

    def __str__(self) -> str:
        def f(xs):
            return ",".join(map(str, xs))
        return f"r={self.r} s={self.s} i={f(self.i)} j={f(self.j)} k={f(self.k)} l={f(self.l)}"


def pair_target(n: int, r: int, s: int) -> Fraction:
    """(n-r)! (n-s)! / n!^2."""
    return Fraction(factorial(n - r) * factorial(n - s), factorial(n) ** 2)


@dataclass(frozen=True)
class PairResult:
    query: PairQuery
    probability: Fraction
    expected: Fraction

    @property
    def passed(self) -> bool:
        return self.probability == self.expected


def _pair_arrays(A: PermFamily, B: PermFamily, work_cap: int) -> tuple[np.ndarray, np.ndarray]:
    if A.degree != B.degree:
        raise ValueError(f"A has degree {A.degree} but B has degree {B.degree}")
    if A.size * B.size > work_cap:
        raise CapExceeded("enumerating all (sigma, tau) pairs", A.size * B.size, work_cap)
    a = A.to_array().astype(np.int64)
    b = B.to_array().astype(np.int64)
    # rho[x, y] = tau_x(sigma_y(.)), flattened to one row per pair (tau-major)
    rho = np.take_along_axis(b[:, None, :], np.broadcast_to(a[None, :, :], (len(b), len(a), A.degree)), axis=2)
    rho = rho.reshape(len(b) * len(a), A.degree)
    tau = np.repeat(b, len(a), axis=0)
    return rho, tau


def _check_split(t: int, n: int, r: int, s: int) -> None:
    if r + s != 2 * t + 1:
        raise ValueError(f"need r + s = 2t + 1 = {2 * t + 1}, got r={r}, s={s}")
    if r > n or s > n:
        raise ValueError(f"need r, s <= n={n}, got r={r}, s={s}")


def check_pair_statistics(
    A: PermFamily, B: PermFamily, t: int, query: PairQuery, work_cap: int = WORK_CAP
) -> PairResult:
    """Exact Pr[(tau∘sigma)(i) = j and tau(k) = l] over all of A x B."""
    n = A.degree
    _check_split(t, n, query.r, query.s)
    rho, tau = _pair_arrays(A, B, work_cap)
    hit = np.ones(len(rho), dtype=bool)
    if query.r:
        hit &= (rho[:, list(query.i)] == np.array(query.j)).all(axis=1)
    if query.s:
        hit &= (tau[:, list(query.k)] == np.array(query.l)).all(axis=1)
    return PairResult(query, Fraction(int(hit.sum()), len(rho)), pair_target(n, query.r, query.s))


@dataclass(frozen=True)
class PairReport:
    t: int
    passed: bool
    splits: dict[tuple[int, int], Fraction]  # common probability per (r, s) that passed
    witness: PairResult | None = None

    def render(self) -> str:
        head = f"pairs verdict={'pass' if self.passed else 'fail'} t={self.t}"
        done = " ".join(f"(r={r},s={s})={p}" for (r, s), p in sorted(self.splits.items()))
        parts = [head, done]
        if self.witness:
            w = self.witness
            parts.append(f"witness={w.query} observed={w.probability} expected={w.expected}")
        return " ".join(p for p in parts if p)


def check_pair_statistics_all(A: PermFamily, B: PermFamily, t: int, work_cap: int = WORK_CAP) -> PairReport:
    """Every split r + s = 2t+1 and every distinct-index query, exhaustively."""
    n = A.degree
    rho, tau = _pair_arrays(A, B, work_cap)
    pairs = len(rho)
    splits: dict[tuple[int, int], Fraction] = {}
    for r in range(2 * t + 2):
        s = 2 * t + 1 - r
        if r > n or s > n:
            continue
        expected = pair_target(n, r, s)
        combos = falling_factorial(n, r) * falling_factorial(n, s)
        radix = np.array([n ** (r + s - 1 - m) for m in range(r + s)], dtype=np.int64)
        for i in permutations(range(n), r):
            for k in permutations(range(n), s):
                cols = np.concatenate([rho[:, list(i)], tau[:, list(k)]], axis=1)
                codes, counts = np.unique(cols @ radix, return_counts=True)
                if len(codes) == combos and counts.min() == counts.max() and Fraction(int(counts[0]), pairs) == expected:
                    continue
                seen = dict(zip(codes.tolist(), counts.tolist()))
                for j, l in product(permutations(range(n), r), permutations(range(n), s)):
                    code = int(np.array(j + l, dtype=np.int64) @ radix) if r + s else 0
                    prob = Fraction(seen.get(code, 0), pairs)
                    if prob != expected:
                        return PairReport(t, False, splits, PairResult(PairQuery(i, j, k, l), prob, expected))
                raise AssertionError("mismatch not located")
        splits[(r, s)] = expected
    return PairReport(t, True, splits)
