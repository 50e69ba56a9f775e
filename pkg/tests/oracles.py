"""Brute-force reference implementations used only by the tests.

They share no code with the package beyond plain tuples.
"""

from collections import Counter
from fractions import Fraction
from itertools import combinations, permutations
from math import factorial


def naive_uniform(perms, t):
    """One pass over the family, counting every (positions, targets) key."""
    perms = [tuple(p) for p in perms]
    n = len(perms[0])
    counts = Counter()
    for p in perms:
        for pos in permutations(range(n), t):
            counts[pos, tuple(p[i] for i in pos)] += 1
    nt = factorial(n) // factorial(n - t)
    for pos in permutations(range(n), t):
        for tgt in permutations(range(n), t):
            if counts[pos, tgt] * nt != len(perms):
                return False
    return True


def mu_by_definition(S, sigma, tau):
    """mu(x) = tau(sigma(f(x))) on S and tau(g(x)) + n off S, f and g order-preserving."""
    n = len(sigma)
    inside = sorted(S)
    outside = [x for x in range(2 * n) if x not in set(S)]
    f = {x: r for r, x in enumerate(inside)}
    g = {x: r for r, x in enumerate(outside)}
    out = {}
    for x in inside:
        out[x] = tau[sigma[f[x]]]
    for x in outside:
        out[x] = tau[g[x]] + n
    return tuple(out[x] for x in range(2 * n))


def lex_subsets(v, k):
    return list(combinations(range(v), k))


def pair_probability(A, B, i, j, k, l):
    hits = 0
    for sigma in A:
        for tau in B:
            rho = [tau[sigma[x]] for x in range(len(sigma))]
            if all(rho[a] == b for a, b in zip(i, j)) and all(tau[a] == b for a, b in zip(k, l)):
                hits += 1
    return Fraction(hits, len(A) * len(B))


def block_count(blocks, subset):
    return sum(1 for b in blocks if set(subset) <= set(b))


def brute_search_design(v, k, t, max_blocks):
    """Unpruned: every multiset by size, then lexicographically."""
    from itertools import combinations_with_replacement

    pool = list(combinations(range(v), k))
    tsets = list(combinations(range(v), t))
    for size in range(1, min(max_blocks, len(pool) - 1) + 1):
        for choice in combinations_with_replacement(pool, size):
            counts = {block_count(choice, ts) for ts in tsets}
            if len(counts) == 1:
                return list(choice)
    return None
