"""Small hand-built markets with known verdicts."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..geometry import Point
from ..market import LocalPrior, Node, ScenarioTree, build_tree
from .binomial import BinomialSpec, gen_binomial_sna_fail

F = Fraction
HALF = F(1, 2)


@dataclass(frozen=True)
class FixtureExpectation:
    na: bool
    sna: bool
    wna: bool
    failing_node: str | None = None
    direction: Point | None = None
    aff_dims: dict = field(default_factory=dict)
    notes: str = ""


def _exex_tree(variant: bool) -> ScenarioTree:
    """Full product {-1, 0, 1}^2; outcomes no prior charges stay in the tree as dead outcomes."""
    p_na = {"-1": HALF, "1": HALF}
    nodes = [
        Node("root", 0, (2,), ("-1", "0", "1"), (LocalPrior({"0": 1}), LocalPrior(p_na))),
    ]
    for w1 in (-1, 0, 1):
        nid = str(w1)
        kids = tuple(f"{nid},{w2}" for w2 in (-1, 0, 1))
        up_only = LocalPrior({f"{nid},1": 1})
        two_sided = LocalPrior({f"{nid},-1": HALF, f"{nid},1": HALF})
        if variant:
            priors = (two_sided, up_only)
        elif w1 != 0:
            priors = (two_sided,)
        else:
            priors = (up_only,)
        nodes.append(Node(nid, 1, (2 + w1,), kids, priors))
        for w2 in (-1, 0, 1):
            nodes.append(Node(f"{nid},{w2}", 2, (2 + w1 + w2,)))
    return build_tree(1, 2, nodes)


def exex():
    return _exex_tree(False), FixtureExpectation(
        na=False, sna=False, wna=True, failing_node="0", direction=(F(1),),
        notes="buy one unit after a flat first step; the mixture avoiding that node is arbitrage-free",
    )


def exex_variant():
    return _exex_tree(True), FixtureExpectation(
        na=True, sna=False, wna=True,
        notes="the point mass on the up move is a prior with arbitrage; the family has none",
    )


def exex_item4():
    nodes = [
        Node("root", 0, (0,), ("-1", "0", "1"),
             (LocalPrior({"-1": HALF, "1": HALF}), LocalPrior({"0": HALF, "1": HALF}))),
        Node("-1", 1, (-1,)),
        Node("0", 1, (0,)),
        Node("1", 1, (1,)),
    ]
    return build_tree(1, 1, nodes), FixtureExpectation(
        na=True, sna=False, wna=True,
        notes="second extreme only moves up or stays; the family still has a loss branch",
    )


def exex_item5():
    kids = {"0,0": (0, 0), "1,0": (1, 0), "0,1": (0, 1), "0,-1": (0, -1)}
    nodes = [
        Node("root", 0, (0, 0), tuple(kids),
             (LocalPrior({"0,0": HALF, "1,0": HALF}), LocalPrior({"0,1": HALF, "0,-1": HALF}))),
    ]
    nodes += [Node(k, 1, v) for k, v in kids.items()]
    return build_tree(2, 1, nodes), FixtureExpectation(
        na=False, sna=False, wna=True, failing_node="root", direction=(F(1), F(0)),
        aff_dims={"D": 2, "D_P2": 1},
        notes="the second extreme alone is arbitrage-free on the vertical axis",
    )


def binomial_sna_fail_ref():
    spec = BinomialSpec(T=2, pi=(F(3, 10), F(6, 10)), u=(F(9, 10), F(13, 10)), d=(F(7, 10), F(9, 10)), grid=2)
    tree, _ = gen_binomial_sna_fail(spec, a=F(95, 100))
    return tree, FixtureExpectation(
        na=True, sna=False, wna=True,
        notes="up factor 0.95 < 1 yields a prior whose moves are all losses",
    )


FIXTURES: dict[str, Callable[[], tuple[ScenarioTree, FixtureExpectation]]] = {
    "exex": exex,
    "exex_variant": exex_variant,
    "exex_item4": exex_item4,
    "exex_item5": exex_item5,
    "binomial_sna_fail_ref": binomial_sna_fail_ref,
}


def fixture_names() -> list[str]:
    return list(FIXTURES)


def fixture(name: str) -> tuple[ScenarioTree, FixtureExpectation]:
    try:
        return FIXTURES[name]()
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; available: {', '.join(FIXTURES)}") from None
