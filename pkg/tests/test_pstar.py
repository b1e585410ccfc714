import random
from fractions import Fraction as F

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from randtrees import random_tree
from robustna.market import KernelSelection, as_kernels, extreme_selections, onehot_selection, uniform_selection
from robustna.models import BinomialSpec, binomial_analytics, fixture, gen_binomial
from robustna.noarb import quasi_sure_na, single_prior_na
from robustna.pstar import (
    NoPStarError,
    construct_pstar,
    corodaniel_check,
    in_P_class,
    mix_measures,
    polar_equivalence,
    sample_P_class,
)
from robustna.supports import selection_support, union_support


@pytest.fixture
def variant():
    return fixture("exex_variant")[0]


# ---------- construct_pstar


def test_variant_kernel_mixes_two_sided_and_up(variant):
    ps = construct_pstar(variant)
    for n in ("-1", "0", "1"):
        assert ps.selection.kernel(variant, n) == {f"{n},-1": F(1, 4), f"{n},1": F(3, 4)}
    assert ps.valid


def test_binomial_uniform_mixture_and_reference_kernel_both_valid():
    spec = BinomialSpec(T=1, pi=(F(3, 10), F(6, 10)), u=(F(11, 10), F(13, 10)), d=(F(7, 10), F(9, 10)))
    tree = gen_binomial(spec)
    ps = construct_pstar(tree)
    assert ps.valid
    kern = ps.selection.kernel(tree, "root")
    assert sum(kern.values()) == 1 and set(kern) == set(tree.nodes["root"].children)
    # the closed-form kernel also has 0 strictly inside the hull of its moves
    an = binomial_analytics(spec, tree, "root")
    moves = [y - 1 for y in an.pstar_kernel]
    assert min(moves) < 0 < max(moves) and sum(an.pstar_kernel.values()) == 1
    assert set(an.pstar_kernel) == {F(13, 10), F(85, 100), F(115, 100), F(7, 10)}  # a+, b+, a-, b-


def test_no_pstar_under_arbitrage():
    with pytest.raises(NoPStarError, match="no P\\* exists: arbitrage at node 0"):
        construct_pstar(fixture("exex")[0])


# ---------- in_P_class / sample_P_class


def test_pstar_is_member_with_full_weight(variant):
    ps = construct_pstar(variant)
    assert in_P_class(variant, ps, ps.selection) == (True, 1)


def test_half_mix_is_member(variant):
    ps = construct_pstar(variant)
    for q in extreme_selections(variant):
        member, lam = in_P_class(variant, ps, mix_measures(variant, F(1, 2), ps, q))
        assert member and lam >= F(1, 2)


def test_zero_weight_on_charged_child_excluded(variant):
    ps = construct_pstar(variant)
    q = onehot_selection(variant, {"root": 0})  # point mass on the flat move at the root
    member, lam = in_P_class(variant, ps, q)
    assert not member and lam == 0


def test_sample_with_full_weight_returns_pstar(variant):
    ps = construct_pstar(variant)
    q = onehot_selection(variant, {})
    assert as_kernels(variant, sample_P_class(variant, ps, 1, q)) == as_kernels(variant, ps)


def test_sample_half_averages_coefficients(variant):
    ps = construct_pstar(variant)
    q = onehot_selection(variant, {})
    got = sample_P_class(variant, ps, F(1, 2), q)
    for n in variant.internal:
        k = len(variant.extremes(n))
        expected = tuple(F(1, 2) * F(1, k) + F(1, 2) * (1 if i == 0 else 0) for i in range(k))
        assert got.mixture[n] == expected


@pytest.mark.parametrize("n", [1, 2, 5, 50, 1000])
def test_vanishing_weight_still_member(variant, n):
    ps = construct_pstar(variant)
    m = sample_P_class(variant, ps, F(1, n), onehot_selection(variant, {}))
    member, lam = in_P_class(variant, ps, m)
    assert member and lam >= F(1, n)


@pytest.mark.parametrize("lam", [0, -1, F(3, 2)])
def test_sample_rejects_bad_weight(variant, lam):
    with pytest.raises(ValueError):
        sample_P_class(variant, construct_pstar(variant), lam, onehot_selection(variant, {}))


# ---------- polar_equivalence


def test_polar_equivalence_variant(variant):
    assert polar_equivalence(variant, construct_pstar(variant))


def test_missing_pstar_edge_is_recharged_by_extremes(variant):
    # Members mix p* with arbitrary selections, which still reach the dropped edge.
    kern = as_kernels(variant, construct_pstar(variant))
    kern = {n: dict(k) for n, k in kern.items()}
    kern["0"] = {"0,1": F(1)}
    assert polar_equivalence(variant, kern)


def test_pstar_charging_dead_outcome_breaks_equivalence(variant):
    kern = {n: dict(k) for n, k in as_kernels(variant, construct_pstar(variant)).items()}
    kern["0"] = {"0,-1": F(1, 4), "0,0": F(1, 4), "0,1": F(1, 2)}
    assert not polar_equivalence(variant, kern)


# ---------- corodaniel_check


def test_corodaniel_on_every_extreme(variant):
    ps = construct_pstar(variant)
    assert all(corodaniel_check(variant, ps, q) for q in extreme_selections(variant))


def test_corodaniel_pstar_itself(variant):
    ps = construct_pstar(variant)
    assert corodaniel_check(variant, ps, ps.selection)


# ---------- properties

seeds = st.integers(0, 10**6)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_pstar_exists_iff_na(seed):
    tree = random_tree(random.Random(seed))
    na = quasi_sure_na(tree).holds
    try:
        ps = construct_pstar(tree)
    except NoPStarError:
        assert not na
        return
    assert na and ps.valid
    assert single_prior_na(tree, ps.selection).holds
    for n in tree.internal:
        if n in tree.non_polar:
            assert selection_support(tree, n, ps).as_set == union_support(tree, n).as_set
    assert polar_equivalence(tree, ps)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_class_members_are_arbitrage_free(seed):
    rng = random.Random(seed)
    tree = random_tree(rng)
    if not quasi_sure_na(tree).holds:
        return
    ps = construct_pstar(tree)
    for _ in range(5):
        q = onehot_selection(tree, {n: rng.randrange(len(tree.extremes(n))) for n in tree.internal})
        m = sample_P_class(tree, ps, F(rng.randint(1, 9), 10), q)
        assert in_P_class(tree, ps, m)[0]
        assert single_prior_na(tree, m).holds


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_any_positive_mixture_works_as_pstar(seed):
    rng = random.Random(seed)
    tree = random_tree(rng)
    if not quasi_sure_na(tree).holds:
        return
    mix = {}
    for n in tree.internal:
        raw = [rng.randint(1, 7) for _ in tree.extremes(n)]
        mix[n] = tuple(F(x, sum(raw)) for x in raw)
    sel = KernelSelection(mix)
    assert single_prior_na(tree, sel).holds
    for n in tree.internal:
        if n in tree.non_polar:
            assert selection_support(tree, n, sel).as_set == union_support(tree, n).as_set
    assert as_kernels(tree, uniform_selection(tree)).keys() == as_kernels(tree, sel).keys()
