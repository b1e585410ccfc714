"""Martingale measures for the dominating prior and the robust pricing check on finite trees."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Mapping

from ._parallel import pmap
from .simplex import OPTIMAL, LPResult, solve_lp
from .market import (
    KernelSelection,
    Measure,
    NodeId,
    ScenarioTree,
    charged_nodes,
    count_extreme_selections,
    extreme_selections,
    onehot_selection,
)
from .noarb import quasi_sure_na
from .pstar import construct_pstar, mix_measures

SELECTION_CAP = 256


@dataclass(frozen=True)
class MartingaleMeasure:
    leaf_weights: Mapping[NodeId, Fraction]

    def mass(self, tree: ScenarioTree) -> dict[NodeId, Fraction]:
        out = {n: Fraction(0) for n in tree.nodes}
        for leaf, w in self.leaf_weights.items():
            for n in tree.path(leaf):
                out[n] += w
        return out

    @cached_property
    def support(self) -> frozenset[NodeId]:
        return frozenset(n for n, w in self.leaf_weights.items() if w > 0)


@dataclass(frozen=True)
class MartingaleResult:
    """Either a measure or the LP outcome explaining its absence."""

    measure: MartingaleMeasure | None
    lp: LPResult
    reason: str = ""

    @property
    def exists(self) -> bool:
        return self.measure is not None


def _check_weights(tree: ScenarioTree, m: MartingaleMeasure) -> None:
    leaves = set(tree.leaves)
    for leaf, w in m.leaf_weights.items():
        if leaf not in leaves:
            raise ValueError(f"malformed weights: {leaf!r} is not a leaf")
        if w < 0:
            raise ValueError(f"malformed weights: negative weight on {leaf!r}")
    total = sum(m.leaf_weights.values(), Fraction(0))
    if total != 1:
        raise ValueError(f"malformed weights: total mass {total}")


def is_martingale(tree: ScenarioTree, m: MartingaleMeasure) -> bool:
    _check_weights(tree, m)
    mass = m.mass(tree)
    for n in tree.internal:
        if not mass[n]:
            continue
        for k in range(tree.d):
            if sum(mass[c] * tree.delta(n, c)[k] for c in tree.nodes[n].children) != 0:
                return False
    return True


def _martingale_lp(
    tree: ScenarioTree, allowed: frozenset[NodeId], required: frozenset[NodeId]
) -> tuple[LPResult, list[NodeId]]:
    """Leaf weights on `allowed` leaves, martingale at every node, maximise the minimum over `required`."""
    leaves = [x for x in tree.leaves if x in allowed]
    idx = {leaf: i for i, leaf in enumerate(leaves)}
    nv = len(leaves) + 1  # last variable is the minimum weight t
    A_eq = [[1] * len(leaves) + [0]]
    b_eq = [1]
    for n in tree.internal:
        rows = [[Fraction(0)] * nv for _ in range(tree.d)]
        touched = False
        for c in tree.nodes[n].children:
            delta = tree.delta(n, c)
            for leaf in tree.descendants_leaves(c):
                if leaf in idx:
                    touched = True
                    for k in range(tree.d):
                        rows[k][idx[leaf]] += delta[k]
        if touched:
            for row in rows:
                if any(row):
                    A_eq.append(row)
                    b_eq.append(0)
    A_ub, b_ub = [], []
    for leaf in leaves:
        if leaf in required:
            row = [0] * nv
            row[idx[leaf]] = -1
            row[-1] = 1
            A_ub.append(row)
            b_ub.append(0)
    c = [0] * len(leaves) + [1]
    return solve_lp(c, A_ub, b_ub, A_eq, b_eq), leaves


def martingale_measure(tree: ScenarioTree, reference: Measure) -> MartingaleResult:
    """An equivalent martingale measure for the reference prior, if one exists."""
    charged = charged_nodes(tree, reference)
    leaves = frozenset(x for x in tree.leaves if x in charged)
    return _measure_for(tree, leaves)


def _local_kernel(tree: ScenarioTree, node: NodeId, kids: list[NodeId]) -> LPResult:
    """Weights on `kids` with zero mean increment, maximising the smallest weight."""
    m = len(kids)
    A_ub = []
    for i in range(m):
        row = [0] * (m + 1)
        row[i] = -1
        row[m] = 1
        A_ub.append(row)
    A_eq = [[1] * m + [0]]
    b_eq = [1]
    deltas = [tree.delta(node, c) for c in kids]
    for k in range(tree.d):
        A_eq.append([dl[k] for dl in deltas] + [0])
        b_eq.append(0)
    return solve_lp([0] * m + [1], A_ub, [0] * m, A_eq, b_eq)


def _measure_for(tree: ScenarioTree, leaves: frozenset[NodeId]) -> MartingaleResult:
    # A measure charging exactly `leaves` factorises into one-step kernels on
    # the subtree spanned by them, so each node is solved on its own.
    live = {n for leaf in leaves for n in tree.path(leaf)}
    nodes = [n for n in tree.internal if n in live]
    results = pmap(lambda n: _local_kernel(tree, n, [c for c in tree.nodes[n].children if c in live]), nodes)
    kernels = {}
    for n, res in zip(nodes, results):
        if res.status != OPTIMAL or res.objective <= 0:
            return MartingaleResult(None, res, "NA(reference) fails")
        kids = [c for c in tree.nodes[n].children if c in live]
        kernels[n] = dict(zip(kids, res.solution))
    weights = {}
    for leaf in tree.leaves:
        if leaf in leaves:
            w = Fraction(1)
            for a, c in tree.edges(leaf):
                w *= kernels[a][c]
            weights[leaf] = w
    smallest = min(weights.values())
    lp = LPResult(OPTIMAL, tuple(weights.values()), (), smallest)
    return MartingaleResult(MartingaleMeasure(weights), lp)


def _dominating_exists(tree: ScenarioTree, q: Measure) -> bool:
    """Is there a martingale measure on the non-polar leaves charging every q-charged leaf?"""
    allowed = frozenset(x for x in tree.leaves if x in tree.non_polar)
    reached = charged_nodes(tree, q)
    required = frozenset(x for x in tree.leaves if x in reached)
    res, _ = _martingale_lp(tree, allowed, required)
    return res.status == "optimal" and res.objective > 0


def _blocking_selection(tree: ScenarioTree, node: NodeId, h) -> KernelSelection:
    """Extreme selection that reaches `node` and then charges a strictly gaining move."""
    choice = {}
    for parent, child in tree.edges(node):
        choice[parent] = next(i for i, p in enumerate(tree.extremes(parent)) if p.weight(child) > 0)
    gain = [c for c in tree.nodes[node].children if sum(a * b for a, b in zip(h, tree.delta(node, c))) > 0]
    choice[node] = next(i for i, p in enumerate(tree.extremes(node)) if any(p.weight(c) > 0 for c in gain))
    return onehot_selection(tree, choice)


def verify_ftap(tree: ScenarioTree) -> bool:
    report = quasi_sure_na(tree)
    if report.holds:
        pstar = construct_pstar(tree)
        cache: dict[frozenset, MartingaleResult] = {}

        def check(q: KernelSelection) -> bool:
            mix = mix_measures(tree, Fraction(1, 2), pstar, q)
            reached = charged_nodes(tree, mix)
            mix_leaves = frozenset(x for x in tree.leaves if x in reached)
            if mix_leaves not in cache:
                cache[mix_leaves] = _measure_for(tree, mix_leaves)
            m = cache[mix_leaves].measure
            if m is None or m.support != mix_leaves:
                return False
            reached = charged_nodes(tree, q)
            q_leaves = {x for x in tree.leaves if x in reached}
            return q_leaves <= m.support

        selections = list(extreme_selections(tree, SELECTION_CAP))
        ok = all(pmap(check, selections))
        if count_extreme_selections(tree) > SELECTION_CAP:
            # Every extreme-charged edge is charged by p*, hence by the mix and
            # the measure; check that edgewise instead of enumerating.
            m = cache.get(frozenset(x for x in tree.leaves if x in tree.non_polar))
            ok = ok and m is not None and m.measure is not None
        return ok
    q = _blocking_selection(tree, report.failing_node, report.per_node[report.failing_node].direction)
    candidates = [q] + list(extreme_selections(tree, SELECTION_CAP))
    return any(not _dominating_exists(tree, c) for c in candidates)
