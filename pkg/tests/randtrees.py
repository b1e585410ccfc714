"""Seeded random scenario trees for property and acceptance tests."""

from __future__ import annotations

import random
from fractions import Fraction

from robustna.market import LocalPrior, Node, ScenarioTree, build_tree


def _weights(rng: random.Random, kids: list[str]) -> dict[str, Fraction]:
    raw = [rng.randint(1, 4) for _ in kids]
    total = sum(raw)
    return {k: Fraction(w, total) for k, w in zip(kids, raw)}


def random_tree(rng: random.Random, d: int | None = None, T: int | None = None,
                max_children: int = 5, max_extremes: int = 4, max_atoms: int = 5,
                balance: float = 0.7) -> ScenarioTree:
    """d <= 3, T <= 3, <= max_extremes extremes per node, <= max_atoms atoms per prior.

    With probability ``balance`` each node's moves are closed under negation,
    which makes arbitrage-free nodes common; otherwise moves are arbitrary
    small integers, so failures also appear.
    """
    d = d or rng.randint(1, 3)
    T = T or rng.randint(1, 3)
    nodes: list[Node] = []
    budget = [60]  # cap internal nodes so T=3 trees stay small

    def grow(nid: str, t: int, price: tuple):
        if t == T:
            nodes.append(Node(nid, t, price))
            return
        cap = max_children if budget[0] > 0 else 2
        budget[0] -= 1
        n_kids = rng.randint(1, cap if t < 2 else min(cap, 3))
        moves: list[tuple] = []
        balanced = rng.random() < balance
        if balanced:
            for _ in range((n_kids + 1) // 2):
                m = tuple(rng.randint(-2, 2) for _ in range(d))
                moves += [m, tuple(-x for x in m)]
        else:
            moves = [tuple(rng.randint(-2, 2) for _ in range(d)) for _ in range(n_kids)]
        kids = [f"{nid}.{i}" for i in range(len(moves))]
        extremes: list[LocalPrior] = []
        for _ in range(rng.randint(1, max_extremes)):
            if balanced and rng.random() < 0.8:
                # charge whole +-pairs so the prior itself tends to be balanced
                pairs = [kids[i:i + 2] for i in range(0, len(kids), 2)]
                chosen = rng.sample(pairs, rng.randint(1, len(pairs)))
                atoms = [k for pair in chosen for k in pair][:max_atoms]
            else:
                atoms = rng.sample(kids, rng.randint(1, min(max_atoms, len(kids))))
            p = LocalPrior(_weights(rng, atoms))
            if p not in extremes:
                extremes.append(p)
        nodes.append(Node(nid, t, price, tuple(kids), tuple(extremes)))
        for k, m in zip(kids, moves):
            grow(k, t + 1, tuple(a + b for a, b in zip(price, m)))

    grow("r", 0, tuple(Fraction(0) for _ in range(d)))
    return build_tree(d, T, nodes)


def tree_suite(n: int = 500, seed: int = 20240601) -> list[ScenarioTree]:
    rng = random.Random(seed)
    return [random_tree(rng) for _ in range(n)]
