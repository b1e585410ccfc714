"""Conditional supports of the one-step price increment at a node."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .geometry import Point, point_set
from .market import KernelSelection, LocalPrior, Measure, NodeId, ScenarioTree, as_kernels

SINGLE_PRIOR = "E"
UNION = "D"
SELECTION = "D_P"


@dataclass(frozen=True)
class SupportSet:
    node: NodeId
    points: tuple[Point, ...]
    provenance: str

    def __iter__(self):
        return iter(self.points)

    def __len__(self):
        return len(self.points)

    def __contains__(self, x) -> bool:
        return tuple(x) in self.points

    @property
    def as_set(self) -> frozenset[Point]:
        return frozenset(self.points)


def _require_internal(tree: ScenarioTree, node: NodeId) -> None:
    if tree.node(node).is_leaf:
        raise ValueError(f"{node!r} is a leaf; supports are defined at non-leaf nodes")


def _support(tree: ScenarioTree, node: NodeId, weights: Mapping[NodeId, object], provenance: str) -> SupportSet:
    kids = tree.nodes[node].children
    pts = point_set(tree.delta(node, c) for c in kids if weights.get(c, 0) > 0)
    if not pts:
        raise ValueError(f"measure at {node!r} charges no child")
    return SupportSet(node, pts, provenance)


def support_of_prior(tree: ScenarioTree, node: NodeId, p: LocalPrior) -> SupportSet:
    _require_internal(tree, node)
    return _support(tree, node, p.weights, SINGLE_PRIOR)


def union_support(tree: ScenarioTree, node: NodeId) -> SupportSet:
    _require_internal(tree, node)
    charged = {c: 1 for p in tree.extremes(node) for c in p.support}
    return _support(tree, node, charged, UNION)


def selection_support(tree: ScenarioTree, node: NodeId, selection: Measure) -> SupportSet:
    _require_internal(tree, node)
    if isinstance(selection, KernelSelection):
        kernel = selection.kernel(tree, node)
    else:
        kernel = as_kernels(tree, selection).get(node, {})
    return _support(tree, node, kernel, SELECTION)
