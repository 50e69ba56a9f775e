from math import comb, factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import mu_by_definition, naive_uniform
from twise.base_families import (
    affine_family,
    alternating_family,
    cyclic_family,
    mobius_family,
    symmetric_family,
)
from twise.combiner import (
    OrderedPartitionFamily,
    build,
    combine,
    combine_k,
    make_mu,
    make_mu_k,
    naive_size,
    plan,
    plan_k,
    render_size_table,
    size_table,
)
from twise.designs import Selection, complete_selection
from twise.perm_core import CapExceeded, Permutation, PermFamily, identity
from twise.verifier import check_uniform


def _id_family(n):
    return PermFamily.explicit([identity(n)])


def test_make_mu_examples():
    assert make_mu((0, 1), identity(2), identity(2)) == (0, 1, 2, 3)
    assert make_mu((2, 3), identity(2), identity(2)) == (2, 3, 0, 1)
    assert make_mu((0, 2), (1, 0), identity(2)) == (1, 2, 0, 3)
    assert mu_by_definition((0, 2), (1, 0), (0, 1)) == (1, 2, 0, 3)


def test_make_mu_rejects_bad_inputs():
    with pytest.raises(ValueError):
        make_mu((0, 1), identity(3), identity(2))
    with pytest.raises(ValueError):
        make_mu((1, 0), identity(2), identity(2))


@st.composite
def mu_inputs(draw):
    n = draw(st.integers(1, 6))
    S = tuple(sorted(draw(st.sets(st.integers(0, 2 * n - 1), min_size=n, max_size=n))))
    sigma = draw(st.permutations(list(range(n))))
    tau = draw(st.permutations(list(range(n))))
    return S, sigma, tau


@given(mu_inputs())
@settings(max_examples=300)
def test_make_mu_matches_definition(args):
    S, sigma, tau = args
    mu = make_mu(S, sigma, tau)
    assert mu == mu_by_definition(S, sigma, tau)
    n = len(sigma)
    assert {mu[x] for x in S} == set(range(n))


def test_combine_small_is_s4():
    fam = combine(complete_selection(4), cyclic_family(2), symmetric_family(2), t=1)
    assert fam.size == 24 and fam.degree == 4
    assert sorted(fam) == sorted(symmetric_family(4))


def test_combine_medium_with_mobius():
    fam = combine(complete_selection(8), cyclic_family(4), mobius_family(3), t=1)
    assert fam.size == 70 * 4 * 24
    rep = check_uniform(fam, 3)
    assert rep.passed and rep.min_count == rep.max_count == 20


def test_combine_degenerate_singletons():
    sel = Selection.explicit(6, 3, [(0, 1, 2)])
    fam = combine(sel, _id_family(3), _id_family(3))
    assert list(fam) == [identity(6)]


def test_combine_index_layout_is_row_major():
    sel, A, B = complete_selection(6), cyclic_family(3), symmetric_family(3)
    fam = combine(sel, A, B)
    for s in range(sel.size):
        for a in range(A.size):
            for b in range(B.size):
                idx = (s * A.size + a) * B.size + b
                assert fam[idx] == make_mu(sel[s], A[a], B[b])


def test_combine_batch_matches_scalar():
    fam = combine(complete_selection(8), cyclic_family(4), mobius_family(3))
    idx = np.arange(0, fam.size, 7)
    assert fam.take(idx).tolist() == [list(fam[int(i)]) for i in idx]


# (2n, t, A, B): A is t-wise, B is (2t+1)-wise (or the full group when 2t+1 > n)
LIFT_CASES = [
    (1, 0, _id_family(1), symmetric_family(1)),
    (2, 0, _id_family(2), cyclic_family(2)),
    (3, 0, _id_family(3), cyclic_family(3)),
    (4, 0, _id_family(4), cyclic_family(4)),
    (2, 1, cyclic_family(2), symmetric_family(2)),
    (3, 1, cyclic_family(3), mobius_family(2)),
    (3, 1, affine_family(3), symmetric_family(3)),
    (4, 1, cyclic_family(4), mobius_family(3)),
    (4, 1, alternating_family(4), symmetric_family(4)),
]


@pytest.mark.parametrize("n, t, A, B", LIFT_CASES, ids=lambda x: getattr(x, "label", str(x)))
def test_uniformity_lift(n, t, A, B):
    fam = combine(complete_selection(2 * n), A, B, t=t, paranoid=True)
    strength = 2 * t + 1
    rep = check_uniform(fam, strength)
    assert rep.passed
    assert naive_uniform(list(fam), strength)


def test_lift_needs_only_t_wise_a():
    # cyclic(4) is 1-wise but not 2-wise, which is all combine needs from A
    assert not check_uniform(cyclic_family(4), 2).passed
    assert check_uniform(combine(complete_selection(8), cyclic_family(4), symmetric_family(4)), 3).passed


@pytest.mark.parametrize("n, t, A, B", LIFT_CASES, ids=lambda x: getattr(x, "label", str(x)))
def test_combine_is_injective_and_block_structured(n, t, A, B):
    sel = complete_selection(2 * n)
    fam = combine(sel, A, B)
    elems = list(fam)
    assert len(set(elems)) == fam.size
    for idx in range(0, fam.size, max(1, fam.size // 50)):
        S = sel[idx // (A.size * B.size)]
        assert {elems[idx][x] for x in S} == set(range(n))


def test_negative_control_b_only_t_wise():
    fam = combine(complete_selection(8), cyclic_family(4), cyclic_family(4))
    rep = check_uniform(fam, 3)
    assert not rep.passed and rep.worst_query is not None
    assert not naive_uniform(list(fam), 3)


def test_paranoid_mode_rejects_weak_b():
    with pytest.raises(ValueError, match="B is not 3-wise"):
        combine(complete_selection(8), cyclic_family(4), cyclic_family(4), t=1, paranoid=True)
    with pytest.raises(ValueError, match="needs the strength"):
        combine(complete_selection(8), cyclic_family(4), symmetric_family(4), paranoid=True)


def test_combine_degree_errors():
    with pytest.raises(ValueError):
        combine(complete_selection(8), cyclic_family(4), cyclic_family(3))
    with pytest.raises(ValueError):
        combine(complete_selection(6), cyclic_family(4), cyclic_family(4))


# -- k groups ---------------------------------------------------------------

@pytest.mark.parametrize("k, n", [(1, 3), (2, 2), (2, 3), (3, 2), (2, 4), (4, 1)])
def test_partition_family_complete(k, n):
    part = OrderedPartitionFamily.complete(k, n)
    assert part.size == factorial(k * n) // factorial(n) ** k
    seen = set()
    for blocks in part:
        assert sorted(x for b in blocks for x in b) == list(range(k * n))
        assert all(len(b) == n and list(b) == sorted(b) for b in blocks)
        seen.add(blocks)
    assert len(seen) == part.size


def test_partition_family_first_block_order():
    part = OrderedPartitionFamily.complete(3, 2)
    assert part[0] == ((0, 1), (2, 3), (4, 5))
    assert part[part.size - 1] == ((4, 5), (2, 3), (0, 1))


def test_combine_k_equals_combine_at_k2():
    for n, A, B in [(2, cyclic_family(2), symmetric_family(2)), (3, cyclic_family(3), symmetric_family(3))]:
        two = combine(complete_selection(2 * n), A, B)
        k2 = combine_k(OrderedPartitionFamily.complete(2, n), B, [A])
        assert sorted(two) == sorted(k2)


def test_combine_k_three_groups():
    fam = combine_k(OrderedPartitionFamily.complete(3, 2), symmetric_family(2), [cyclic_family(2), cyclic_family(2)], t=1)
    assert fam.size == 720 and fam.degree == 6
    rep = check_uniform(fam, 3)
    assert rep.passed and rep.min_count == rep.max_count == 6


def test_combine_k_three_groups_stronger_inputs():
    # degree 9 from three groups of 3: tau must be 3-wise, sigmas 1-wise
    fam = combine_k(OrderedPartitionFamily.complete(3, 3), mobius_family(2), [cyclic_family(3)] * 2, t=1)
    assert fam.size == factorial(9) // 6**3 * 6 * 9
    assert check_uniform(fam, 3).passed


def test_combine_k_degenerate():
    part = OrderedPartitionFamily(3, 2, partitions=[((1, 4), (0, 5), (2, 3))])
    fam = combine_k(part, _id_family(2), [_id_family(2), _id_family(2)])
    assert list(fam) == [Permutation([2, 0, 4, 5, 1, 3])]
    assert make_mu_k(((1, 4), (0, 5), (2, 3)), (0, 1), [(0, 1), (0, 1)]) == fam[0]


def test_combine_k_errors():
    with pytest.raises(ValueError):
        combine_k(OrderedPartitionFamily.complete(3, 2), symmetric_family(2), [cyclic_family(2)])
    with pytest.raises(ValueError):
        OrderedPartitionFamily(2, 2, partitions=[((0, 1), (1, 2))])


# -- plans ------------------------------------------------------------------

def test_plan_examples():
    p = plan(2, 3)
    assert p.kind == "base" and p.base.name == "symmetric" and p.size == 2
    p = plan(4, 3, use_catalog=False)
    assert p.kind == "combine" and p.selection_size == 6 and p.size == 24
    left, right = p.children
    assert (left.base.name, left.size) == ("cyclic", 2)
    assert (right.base.name, right.size) == ("symmetric", 2)
    assert p.size <= 3**8
    p = plan(8, 7, use_catalog=False)
    assert p.size == 70 * 24 * 24 == 40320 and p.size <= 7**16


def test_plan_with_catalog_uses_mobius():
    p = plan(8, 3)
    assert p.kind == "base" and p.base.name == "mobius" and p.size == 336


def test_plan_render():
    assert plan(4, 3, use_catalog=False).render() == (
        "combine n=4 t=3 size=24 selection=complete(6)\n"
        "  base cyclic(2) n=2 t=1 size=2\n"
        "  base symmetric(2) n=2 t=3 size=2"
    )


@pytest.mark.parametrize("n, t", [(6, 3), (8, 2), (8, 4), (1, 1), (4, 0)])
def test_plan_rejects_bad_forms(n, t):
    with pytest.raises(ValueError):
        plan(n, t)


@pytest.mark.parametrize("use_catalog", [False, True])
def test_plan_sizes_within_bound(use_catalog):
    for m in range(1, 7):
        for l in range(2, 5):
            n, t = 2**m, 2**l - 1
            assert plan(n, t, use_catalog=use_catalog).size <= t ** (2 * n)


def test_plan_size_recursion_by_hand():
    # per(2^m, 3) from cyclic halves and the recursion, no catalog
    expected = {2: 2}
    for m in range(2, 7):
        n = 2**m
        expected[n] = comb(n, n // 2) * (n // 2) * expected[n // 2]
        assert plan(n, 3, use_catalog=False).size == expected[n]


@pytest.mark.parametrize("n, t, use_catalog", [(2, 3, False), (4, 3, False), (8, 3, False), (8, 7, False), (16, 3, True), (32, 3, True), (16, 7, False)])
def test_build_size_matches_plan(n, t, use_catalog):
    p = plan(n, t, use_catalog=use_catalog)
    fam = build(p)
    assert fam.size == p.size and fam.degree == n


def test_build_examples():
    assert sorted(build(plan(2, 3))) == sorted(symmetric_family(2))
    fam = build(plan(4, 3, use_catalog=False))
    assert sorted(fam) == sorted(symmetric_family(4))
    assert check_uniform(fam, 3).passed
    fam = build(plan(8, 3, use_catalog=False))
    assert fam.size == 6720 and check_uniform(fam, 3).passed


def test_build_cap():
    with pytest.raises(CapExceeded) as info:
        build(plan(8, 3, use_catalog=False), cap=1000)
    assert info.value.required == 6720


def test_plan_with_custom_selection():
    p = plan(4, 3, use_catalog=False, selection=complete_selection(4))
    assert p.size == plan(4, 3, use_catalog=False).size
    # two complementary blocks form a (4,1)-selection; A only needs 0-wise
    sel = Selection.explicit(4, 2, [(0, 1), (2, 3)])
    p = plan(4, 1, selection=sel)
    assert p.size == 2 * 1 * 2
    assert p.children[0].base.name == "identity"
    fam = build(p)
    assert check_uniform(fam, 1).passed
    # the same selection is too weak for strength 3
    fam = build(plan(4, 3, use_catalog=False, selection=sel))
    assert not check_uniform(fam, 3).passed


def test_plan_k_builds_uniform_family():
    p = plan_k(3, 2, 1)
    assert p.n == 6 and p.t == 3 and p.size == 720
    fam = build(p)
    assert fam.size == p.size and check_uniform(fam, 3).passed
    assert "combine_k k=3" in p.render()


def test_size_table_examples():
    rows = {(r.m, r.l): r for r in size_table(3, 3)}
    r = rows[2, 2]
    assert (r.improved, r.naive, r.bound) == (24, 24, 6561)
    r = rows[3, 2]
    assert (r.improved, r.naive, r.bound) == (6720, 40320, 3**16)
    for r in size_table(6, 4):
        assert r.improved <= r.naive and r.improved <= r.bound


def test_naive_size():
    assert naive_size(4, 3) == comb(4, 2) * 2 * 2
    assert naive_size(8, 3) == 70 * 24**2


def test_render_size_table_lines():
    text = render_size_table(size_table(3, 2))
    lines = text.splitlines()
    assert lines[0].split() == ["m", "l", "n", "t", "improved", "naive", "t^(2n)", "n!"]
    assert lines[-1].split() == ["3", "2", "8", "3", "6720", "40320", "43046721", "40320"]
