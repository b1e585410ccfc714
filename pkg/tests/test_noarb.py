import math
import random
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import best_mass_below, inradius_float
from randtrees import random_tree
from robustna.geometry import inradius_sq
from robustna.market import LocalPrior, Node, Strategy, build_tree, portfolio_value, uniform_selection
from robustna.models import BinomialSpec, binomial_analytics, fixture, gen_binomial
from robustna.noarb import (
    NA_FAILS,
    NA_HOLDS,
    NoConstantsError,
    extract_arbitrage,
    global_arbitrage_search,
    kappa_for_beta,
    local_na,
    quantitative_constants,
    quantitative_na,
    quasi_sure_na,
    single_prior_na,
    strong_na,
    weak_na,
)
from robustna.supports import selection_support, union_support


def one_period(moves, priors, d=1):
    kids = tuple(f"c{i}" for i in range(len(moves)))
    zero = (0,) * d
    ext = tuple(LocalPrior({kids[i]: F(w) for i, w in p.items()}) for p in priors)
    nodes = [Node("root", 0, zero, kids, ext)]
    nodes += [Node(k, 1, m if isinstance(m, tuple) else (m,)) for k, m in zip(kids, moves)]
    return build_tree(d, 1, nodes)


def flat_tree():
    return one_period([0], [{0: 1}])


@pytest.fixture
def exex():
    return fixture("exex")[0]


@pytest.fixture
def variant():
    return fixture("exex_variant")[0]


# ---------- local_na


def test_local_na_fails_after_flat_step(exex):
    rep = local_na(exex, "0")
    assert not rep.ok and rep.direction == (1,)
    assert rep.support.as_set == {(1,)}


def test_local_na_at_exex_root(exex):
    rep = local_na(exex, "root")
    assert rep.ok and rep.aff_dim == 1
    assert all(w > 0 for w in rep.weights)


def test_local_na_degenerate_support():
    rep = local_na(flat_tree(), "root")
    assert rep.ok and rep.aff_dim == 0


def test_local_na_rejects_leaf(exex):
    with pytest.raises(ValueError):
        local_na(exex, "0,1")


# ---------- quasi_sure_na


def test_exex_fails_at_flat_node(exex):
    rep = quasi_sure_na(exex)
    assert rep.verdict == NA_FAILS and rep.failing_node == "0"
    assert rep.arbitrage.holdings == {"0": (1,)}


def test_variant_holds(variant):
    rep = quasi_sure_na(variant)
    assert rep.verdict == NA_HOLDS and rep.arbitrage is None


def test_binomial_holds():
    spec = BinomialSpec(T=2, pi=(F(3, 10), F(6, 10)), u=(F(11, 10), F(13, 10)), d=(F(7, 10), F(9, 10)))
    assert quasi_sure_na(gen_binomial(spec)).holds


def test_earliest_failing_node_reported():
    # both children of the root fail locally; the lexicographically first is reported
    nodes = [Node("r", 0, (0,), ("a", "b"), (LocalPrior({"a": F(1, 2), "b": F(1, 2)}),)),
             Node("a", 1, (1,), ("a1",), (LocalPrior({"a1": 1}),)),
             Node("b", 1, (-1,), ("b1",), (LocalPrior({"b1": 1}),)),
             Node("a1", 2, (2,)), Node("b1", 2, (-2,))]
    assert quasi_sure_na(build_tree(1, 2, nodes)).failing_node == "a"


# ---------- global_arbitrage_search


def test_global_search_exex(exex):
    found = global_arbitrage_search(exex)
    assert found is not None
    assert found.leaf == "0,1"
    assert found.strategy.holdings["0"][0] > 0
    vals = {leaf: portfolio_value(exex, found.strategy, 0, leaf) for leaf in exex.leaves if leaf in exex.non_polar}
    assert all(v >= 0 for v in vals.values()) and vals["0,1"] > 0


def test_global_search_variant(variant):
    assert global_arbitrage_search(variant) is None


def test_global_search_two_point_market():
    assert global_arbitrage_search(one_period([-1, 2], [{0: F(1, 2), 1: F(1, 2)}])) is None


def test_global_search_respects_box():
    found = global_arbitrage_search(one_period([1, 2], [{0: F(1, 2), 1: F(1, 2)}]))
    assert found.strategy.holdings == {"root": (1,)}


# ---------- strong_na


def test_strong_na_item4():
    tree, _ = fixture("exex_item4")
    res = strong_na(tree)
    assert not res.holds and res.witnesses == (("root", 1),)
    assert quasi_sure_na(tree).holds


def test_strong_na_binomial_with_losing_up_factor():
    tree, _ = fixture("binomial_sna_fail_ref")
    assert not strong_na(tree).holds and quasi_sure_na(tree).holds


def test_strong_na_single_full_support_prior():
    assert strong_na(one_period([-1, 1], [{0: F(1, 3), 1: F(2, 3)}])).holds


# ---------- weak_na


def test_weak_na_exex_avoids_flat_node(exex):
    res = weak_na(exex)
    assert res.holds
    assert res.witness.mixture["root"] == (0, 1)
    assert single_prior_na(exex, res.witness).holds


def test_weak_na_item5():
    tree, _ = fixture("exex_item5")
    assert weak_na(tree).holds and not quasi_sure_na(tree).holds
    rep = local_na(tree, "root")
    assert rep.direction == (1, 0) and rep.aff_dim == 2


def test_weak_na_fails_when_every_prior_gains():
    tree = one_period([1, 2, 3], [{0: 1}, {1: F(1, 2), 2: F(1, 2)}])
    res = weak_na(tree)
    assert not res.holds and res.witness is None


# ---------- quantitative constants


def test_constants_two_point_support():
    priors = [{0: F(1, 3), 1: F(2, 3)}, {0: F(3, 4), 1: F(1, 4)}]
    tree = one_period([-1, 2], priors)
    q = quantitative_constants(tree, "root")
    assert q.epsilon == 1 and q.beta == 0.5 and q.beta_sq == F(1, 4)
    atoms = [[((-1,), p[0]), ((2,), p[1])] for p in priors]
    # h = +1: mass on moves below -1/2; h = -1: mass on moves above 1/2
    oracle = min(best_mass_below(atoms, (h,), F(1, 2)) for h in (1, -1))
    assert q.kappa == oracle == F(2, 3)
    assert q.alpha == min(0.5, 2 / 3) and q.exact


def test_constants_degenerate_support():
    q = quantitative_constants(flat_tree(), "root")
    assert (q.epsilon, q.beta, q.kappa, q.alpha) == (2, 1, 1, 1)


def test_constants_binomial_root():
    spec = BinomialSpec(T=1, pi=(F(3, 10), F(6, 10)), u=(F(11, 10), F(13, 10)), d=(F(7, 10), F(9, 10)))
    tree = gen_binomial(spec)
    q = quantitative_constants(tree, "root")
    assert q.epsilon_sq == F(9, 100)
    an = binomial_analytics(spec, tree, "root")
    assert an.beta_closed_form == F(3, 40) and an.kappa_closed_form == F(9, 40)
    assert kappa_for_beta(tree, "root", an.beta_closed_form) >= an.kappa_closed_form


def test_constants_refuse_arbitrage_node(exex):
    with pytest.raises(NoConstantsError, match="no quantitative constants: arbitrage at node 0"):
        quantitative_constants(exex, "0")


def test_kappa_symmetric_two_point():
    tree = one_period([-1, 1], [{0: F(1, 2), 1: F(1, 2)}])
    assert kappa_for_beta(tree, "root", F(1, 2)) == F(1, 2)


def test_kappa_with_large_beta_is_zero():
    tree = one_period([-1, 1], [{0: F(1, 2), 1: F(1, 2)}])
    assert kappa_for_beta(tree, "root", 2) == 0


def test_kappa_rejects_nonpositive_beta():
    tree = one_period([-1, 1], [{0: F(1, 2), 1: F(1, 2)}])
    with pytest.raises(ValueError):
        kappa_for_beta(tree, "root", 0)


def test_kappa_under_the_dominating_mixture_is_positive_and_smaller():
    tree = fixture("exex_variant")[0]
    for n in tree.internal:
        beta = F(1, 2)
        pstar_kernel = uniform_selection(tree).kernel(tree, n)
        k_star = kappa_for_beta(tree, n, beta, priors=[LocalPrior(pstar_kernel)])
        assert 0 < k_star <= kappa_for_beta(tree, n, beta)


def test_kappa_planar_matches_dense_sweep():
    moves = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1)]
    priors = [{0: F(1, 4), 1: F(1, 4), 2: F(1, 4), 3: F(1, 4)}, {1: F(1, 2), 4: F(1, 2)}]
    tree = one_period(moves, priors, d=2)
    q = quantitative_constants(tree, "root")
    assert q.exact and q.epsilon_sq == inradius_sq(union_support(tree, "root").points)
    assert q.epsilon == pytest.approx(inradius_float(union_support(tree, "root").points), abs=1e-12)
    ang = np.linspace(0, 2 * np.pi, 20000, endpoint=False)
    H = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    masses = []
    for h in H:
        best = 0.0
        for p in priors:
            best = max(best, sum(float(w) for i, w in p.items() if h @ np.array(moves[i], float) < -q.beta))
        masses.append(best)
    # sampled directions can only overestimate the infimum; here it is attained on an arc
    assert min(masses) >= float(q.kappa) - 1e-12
    assert q.kappa == F(1, 4) and min(masses) == 0.25


def test_kappa_sampled_in_three_dimensions():
    moves = [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1)]
    tree = one_period(moves, [{i: F(1, 6) for i in range(6)}], d=3)
    q = quantitative_constants(tree, "root")
    assert not q.exact and 0 < q.kappa <= 1


# ---------- extract_arbitrage


def test_extract_exex(exex):
    s = extract_arbitrage(exex, "0", (1,))
    assert s.holdings == {"0": (1,)}


def test_extract_gains_on_every_move():
    tree = one_period([1, 2], [{0: F(1, 2), 1: F(1, 2)}])
    s = extract_arbitrage(tree, "root", (1,))
    assert {portfolio_value(tree, s, 0, leaf) for leaf in tree.leaves} == {1, 2}


def test_extract_rejects_bad_direction(exex):
    with pytest.raises(ValueError):
        extract_arbitrage(exex, "root", (1,))


# ---------- properties

seeds = st.integers(0, 10**6)


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_three_verdicts_agree(seed):
    tree = random_tree(random.Random(seed))
    geo = quasi_sure_na(tree)
    assert geo.holds == (global_arbitrage_search(tree) is None) == quantitative_na(tree)
    if not geo.holds:
        assert Strategy(geo.arbitrage.holdings) and _is_arb(tree, geo.arbitrage)


def _is_arb(tree, s):
    vals = [portfolio_value(tree, s, 0, leaf) for leaf in tree.leaves if leaf in tree.non_polar]
    return all(v >= 0 for v in vals) and any(v > 0 for v in vals)


@settings(max_examples=120, deadline=None)
@given(seeds)
def test_implication_chain(seed):
    tree = random_tree(random.Random(seed))
    s, n, w = strong_na(tree).holds, quasi_sure_na(tree).holds, weak_na(tree).holds
    assert (not s or n) and (not n or w)


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_beta_is_half_inradius(seed):
    tree = random_tree(random.Random(seed), d=rng_d(seed))
    for n in tree.internal:
        if n in tree.non_polar and local_na(tree, n).ok:
            q = quantitative_constants(tree, n)
            assert q.beta_sq * 4 == q.epsilon_sq == inradius_sq(union_support(tree, n).points)
            assert math.isclose(q.beta, q.epsilon / 2) and 0 < q.kappa <= 1


def rng_d(seed):
    return 1 + seed % 2


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_kappa_exact_in_one_dimension(seed):
    tree = random_tree(random.Random(seed), d=1)
    for n in tree.internal:
        if n not in tree.non_polar or not local_na(tree, n).ok:
            continue
        q = quantitative_constants(tree, n)
        if not any(any(x) for x in union_support(tree, n).points):
            continue
        atoms = [[(tree.delta(n, c), w) for c, w in p.weights.items()] for p in tree.extremes(n)]
        beta = F(math.isqrt(q.epsilon_sq.numerator), math.isqrt(q.epsilon_sq.denominator)) / 2
        if beta * beta * 4 != q.epsilon_sq:
            continue  # only exercise rational inradii here
        assert q.kappa == min(best_mass_below(atoms, (h,), beta) for h in (1, -1))


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_dominating_mixture_decides_na(seed):
    tree = random_tree(random.Random(seed))
    phat = uniform_selection(tree)
    assert quasi_sure_na(tree).holds == single_prior_na(tree, phat).holds
    for n in tree.internal:
        if n in tree.non_polar:
            assert selection_support(tree, n, phat).as_set == union_support(tree, n).as_set


@settings(max_examples=60, deadline=None)
@given(seeds)
def test_reweighting_keeps_verdicts(seed):
    rng = random.Random(seed)
    tree = random_tree(rng)
    new = {}
    for n in tree.internal:
        ext = []
        for p in tree.extremes(n):
            raw = {c: F(rng.randint(1, 9)) for c in p.support}
            tot = sum(raw.values())
            ext.append(LocalPrior({c: w / tot for c, w in raw.items()}))
        if len(set(ext)) == len(ext):
            new[n] = ext
    other = tree.with_priors(new)
    assert quasi_sure_na(tree).holds == quasi_sure_na(other).holds
    assert strong_na(tree).holds == strong_na(other).holds
