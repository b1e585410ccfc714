"""The dominating arbitrage-free prior P* and the class P^T built around it."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

from .market import (
    Kernel,
    KernelSelection,
    Kernels,
    Measure,
    NodeId,
    ScenarioTree,
    as_kernels,
    charged_nodes,
    uniform_selection,
)
from .noarb import origin_interior, quasi_sure_na, single_prior_na
from .supports import selection_support, union_support


class NoPStarError(ValueError):
    pass


@dataclass(frozen=True)
class NodeCheck:
    support_equal: bool
    interior: bool


@dataclass(frozen=True)
class PStarSelection:
    selection: KernelSelection
    checks: Mapping[NodeId, NodeCheck]

    @property
    def valid(self) -> bool:
        return all(c.support_equal and c.interior for c in self.checks.values())


PStarLike = Union[PStarSelection, KernelSelection, Kernels]


def construct_pstar(tree: ScenarioTree) -> PStarSelection:
    """Uniform mixture of all extremes at every node."""
    report = quasi_sure_na(tree)
    if not report.holds:
        raise NoPStarError(f"no P* exists: arbitrage at node {report.failing_node}")
    sel = uniform_selection(tree)
    checks = {}
    for n in tree.internal:
        if n not in tree.non_polar:
            continue
        sp = selection_support(tree, n, sel)
        checks[n] = NodeCheck(sp.as_set == union_support(tree, n).as_set, origin_interior(sp.points))
    return PStarSelection(sel, checks)


def _coeff_mix(tree, lam: Fraction, a: KernelSelection, b: KernelSelection) -> KernelSelection:
    mix = {}
    for n in tree.internal:
        mix[n] = tuple(lam * x + (1 - lam) * y for x, y in zip(a.mixture[n], b.mixture[n]))
    return KernelSelection(mix)


def _kernel_mix(tree, lam: Fraction, a: Kernels, b: Kernels) -> dict[NodeId, Kernel]:
    out = {}
    for n in tree.internal:
        ka, kb = a.get(n, {}), b.get(n, {})
        k = {}
        for c in tree.nodes[n].children:
            w = lam * ka.get(c, 0) + (1 - lam) * kb.get(c, 0)
            if w:
                k[c] = w
        out[n] = k
    return out


def mix_measures(tree: ScenarioTree, lam, pstar: PStarLike, q: Measure):
    """Nodewise lam * p* + (1 - lam) * q; stays a KernelSelection when both inputs are."""
    lam = Fraction(lam)
    p = pstar.selection if isinstance(pstar, PStarSelection) else pstar
    if isinstance(p, KernelSelection) and isinstance(q, KernelSelection):
        return _coeff_mix(tree, lam, p, q)
    return _kernel_mix(tree, lam, as_kernels(tree, p), as_kernels(tree, q))


def in_P_class(tree: ScenarioTree, pstar: PStarLike, selection: Measure) -> tuple[bool, Fraction]:
    """Componentwise domination sel >= lam * p* at every non-leaf node; returns (member, largest lam)."""
    ps = as_kernels(tree, pstar)
    qs = as_kernels(tree, selection)
    lam = Fraction(1)
    for n in tree.internal:
        kp, kq = ps.get(n, {}), qs.get(n, {})
        for c, w in kp.items():
            if w > 0:
                lam = min(lam, Fraction(kq.get(c, 0)) / w)
    return lam > 0, lam


def sample_P_class(tree: ScenarioTree, pstar: PStarLike, lam, q: Measure):
    lam = Fraction(lam)
    if not 0 < lam <= 1:
        raise ValueError(f"lambda must lie in (0, 1], got {lam}")
    return mix_measures(tree, lam, pstar, q)


def polar_equivalence(tree: ScenarioTree, pstar: PStarLike) -> bool:
    """Do the members of P^T charge exactly the non-polar nodes?

    A node has positive mass under some member lam p* + (1 - lam) q iff each
    edge on its path is charged by p* or by some extreme prior of its parent.
    """
    ps = as_kernels(tree, pstar)
    reach, stack = {tree.root}, [tree.root]
    while stack:
        n = stack.pop()
        charged = {c for c, w in ps.get(n, {}).items() if w > 0}
        charged.update(c for p in tree.extremes(n) for c in p.support)
        for c in tree.nodes[n].children:
            if c in charged and c not in reach:
                reach.add(c)
                stack.append(c)
    # independent side: edge-by-edge path scan
    non_polar = set()
    for n in tree.order:
        if all(any(p.weight(c) > 0 for p in tree.extremes(a)) for a, c in tree.edges(n)):
            non_polar.add(n)
    return reach == non_polar


def corodaniel_check(tree: ScenarioTree, pstar: PStarLike, q: Measure) -> bool:
    """P = 1/2 p* + 1/2 q dominates q and is arbitrage-free on its own."""
    P = mix_measures(tree, Fraction(1, 2), pstar, q)
    if not charged_nodes(tree, q) <= charged_nodes(tree, P):
        return False
    return single_prior_na(tree, P).holds
