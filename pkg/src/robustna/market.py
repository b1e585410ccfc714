"""Finite scenario-tree markets with finitely generated local prior sets."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Iterator, Mapping, Sequence, Union

from .geometry import Point, dot, point

NodeId = str
Kernel = dict[NodeId, Fraction]
Kernels = Mapping[NodeId, Mapping[NodeId, Fraction]]


@dataclass(frozen=True, eq=False)
class LocalPrior:
    """A probability vector over (some of) a node's children."""

    weights: Mapping[NodeId, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "weights", {c: Fraction(w) for c, w in self.weights.items()})

    @property
    def support(self) -> tuple[NodeId, ...]:
        return tuple(c for c, w in self.weights.items() if w > 0)

    def weight(self, child: NodeId) -> Fraction:
        return self.weights.get(child, Fraction(0))

    def key(self) -> tuple:
        return tuple(sorted((c, w) for c, w in self.weights.items() if w != 0))

    def __eq__(self, other):
        return isinstance(other, LocalPrior) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        inner = ", ".join(f"{c}: {w}" for c, w in self.weights.items())
        return f"LocalPrior({{{inner}}})"


@dataclass(frozen=True)
class PriorSet:
    """Convex hull of finitely many extreme local priors."""

    extremes: tuple[LocalPrior, ...]

    def __post_init__(self):
        object.__setattr__(self, "extremes", tuple(self.extremes))

    def __len__(self):
        return len(self.extremes)

    def __iter__(self):
        return iter(self.extremes)

    def __getitem__(self, i):
        return self.extremes[i]


@dataclass(frozen=True)
class Node:
    id: NodeId
    t: int
    price: Point
    children: tuple[NodeId, ...] = ()
    priors: PriorSet | None = None

    def __post_init__(self):
        object.__setattr__(self, "price", point(self.price))
        object.__setattr__(self, "children", tuple(self.children))
        if self.priors is not None and not isinstance(self.priors, PriorSet):
            object.__setattr__(self, "priors", PriorSet(tuple(self.priors)))

    @property
    def is_leaf(self) -> bool:
        return not self.children


@dataclass(frozen=True)
class Diagnostic:
    level: str  # "error" or "warning"
    node: NodeId | None
    message: str

    def __str__(self):
        where = f"node {self.node}: " if self.node is not None else ""
        return f"{self.level}: {where}{self.message}"


@dataclass(frozen=True)
class ScenarioTree:
    d: int
    T: int
    nodes: Mapping[NodeId, Node]

    @cached_property
    def order(self) -> tuple[NodeId, ...]:
        """Node ids sorted by time, then lexicographically."""
        return tuple(sorted(self.nodes, key=lambda n: (self.nodes[n].t, n)))

    @cached_property
    def parent(self) -> dict[NodeId, NodeId]:
        return {c: n.id for n in self.nodes.values() for c in n.children}

    @cached_property
    def root(self) -> NodeId:
        roots = [n for n in self.order if n not in self.parent]
        if len(roots) != 1:
            raise ValueError(f"expected a unique root, found {len(roots)}")
        return roots[0]

    @property
    def leaves(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.order if self.nodes[n].is_leaf)

    @property
    def internal(self) -> tuple[NodeId, ...]:
        return tuple(n for n in self.order if not self.nodes[n].is_leaf)

    def node(self, node_id: NodeId) -> Node:
        try:
            return self.nodes[node_id]
        except KeyError:
            raise KeyError(f"unknown node {node_id!r}") from None

    def extremes(self, node_id: NodeId) -> tuple[LocalPrior, ...]:
        ps = self.node(node_id).priors
        return ps.extremes if ps is not None else ()

    def path(self, node_id: NodeId) -> list[NodeId]:
        """Root-to-node list of ids."""
        out = [node_id]
        while out[-1] in self.parent:
            out.append(self.parent[out[-1]])
        return out[::-1]

    def edges(self, node_id: NodeId) -> Iterator[tuple[NodeId, NodeId]]:
        p = self.path(node_id)
        return zip(p, p[1:])

    def descendants_leaves(self, node_id: NodeId) -> list[NodeId]:
        stack, out = [node_id], []
        while stack:
            n = stack.pop()
            kids = self.nodes[n].children
            if kids:
                stack.extend(kids)
            else:
                out.append(n)
        return sorted(out)

    def delta(self, node_id: NodeId, child: NodeId) -> Point:
        node = self.node(node_id)
        if child not in node.children:
            raise ValueError(f"{child!r} is not a child of {node_id!r}")
        return tuple(a - b for a, b in zip(self.nodes[child].price, node.price))

    @cached_property
    def non_polar(self) -> frozenset[NodeId]:
        """Nodes whose every path edge is charged by some extreme prior of its parent."""
        seen = {self.root}
        stack = [self.root]
        while stack:
            n = stack.pop()
            charged = {c for p in self.extremes(n) for c in p.support}
            for c in self.nodes[n].children:
                if c in charged and c not in seen:
                    seen.add(c)
                    stack.append(c)
        return frozenset(seen)

    def with_priors(self, priors: Mapping[NodeId, Sequence[LocalPrior]]) -> "ScenarioTree":
        """Copy of the tree with some nodes' prior sets replaced."""
        nodes = dict(self.nodes)
        for n, ext in priors.items():
            nodes[n] = Node(n, nodes[n].t, nodes[n].price, nodes[n].children, PriorSet(tuple(ext)))
        return ScenarioTree(self.d, self.T, nodes)


def build_tree(d: int, T: int, nodes: Iterable[Node]) -> ScenarioTree:
    """Assemble a tree and raise ValueError listing every error-level diagnostic."""
    tree = ScenarioTree(d, T, {n.id: n for n in nodes})
    errors = [x for x in validate(tree) if x.level == "error"]
    if errors:
        raise ValueError("invalid scenario tree:\n" + "\n".join(str(e) for e in errors))
    return tree


def validate(tree: ScenarioTree) -> list[Diagnostic]:
    out: list[Diagnostic] = []

    def err(node, msg):
        out.append(Diagnostic("error", node, msg))

    nodes = tree.nodes
    if not nodes:
        return [Diagnostic("error", None, "tree has no nodes")]
    referenced: dict[NodeId, NodeId] = {}
    for n in sorted(nodes):
        rec = nodes[n]
        if rec.id != n:
            err(n, f"record id {rec.id!r} differs from key")
        if len(rec.price) != tree.d:
            err(n, f"price has {len(rec.price)} coordinates, expected d={tree.d}")
        for c in rec.children:
            if c not in nodes:
                err(n, f"child {c!r} does not exist")
                continue
            if c in referenced:
                err(c, f"node has two parents ({referenced[c]!r}, {n!r})")
            referenced[c] = n
            if nodes[c].t != rec.t + 1:
                err(c, f"child time {nodes[c].t} does not follow parent time {rec.t}")
        if len(set(rec.children)) != len(rec.children):
            err(n, "duplicate children")
        if rec.is_leaf:
            if rec.t != tree.T:
                err(n, f"leaf at time {rec.t}, expected T={tree.T}")
            if rec.priors is not None and len(rec.priors):
                err(n, "leaf carries priors")
            continue
        if rec.priors is None or not len(rec.priors):
            err(n, "non-leaf node without priors")
            continue
        seen: set = set()
        charged: set = set()
        for i, p in enumerate(rec.priors):
            total = sum(p.weights.values(), Fraction(0))
            if total != 1:
                err(n, f"prior {i} weights sum to {total}, not 1")
            for c, w in p.weights.items():
                if c not in rec.children:
                    err(n, f"prior {i} charges {c!r}, which is not a child")
                if w <= 0:
                    err(n, f"prior {i} has non-positive weight {w} on {c!r}")
            if p in seen:
                err(n, f"prior {i} duplicates an earlier extreme")
            seen.add(p)
            charged.update(p.support)
        for c in rec.children:
            if c not in charged:
                out.append(Diagnostic("warning", c, f"dead outcome: no prior of {n!r} charges it"))
    roots = [n for n in nodes if n not in referenced]
    if len(roots) != 1:
        err(None, f"expected a unique root, found {len(roots)}")
    else:
        if nodes[roots[0]].t != 0:
            err(roots[0], "root is not at time 0")
        # every node must hang off the root
        reach, stack = {roots[0]}, [roots[0]]
        while stack:
            for c in nodes[stack.pop()].children:
                if c in nodes and c not in reach:
                    reach.add(c)
                    stack.append(c)
        for n in sorted(set(nodes) - reach):
            err(n, "unreachable from the root")
    return out


@dataclass(frozen=True)
class KernelSelection:
    """Convex coefficients over each non-leaf node's extremes; a measure in Q^T."""

    mixture: Mapping[NodeId, tuple[Fraction, ...]]

    def __post_init__(self):
        object.__setattr__(
            self, "mixture", {n: tuple(Fraction(x) for x in c) for n, c in self.mixture.items()}
        )

    def kernel(self, tree: ScenarioTree, node: NodeId) -> Kernel:
        coeffs = self.mixture.get(node)
        ext = tree.extremes(node)
        if coeffs is None or len(coeffs) != len(ext):
            raise ValueError(f"selection has no valid coefficients at {node!r}")
        out: Kernel = {}
        for lam, p in zip(coeffs, ext):
            if lam:
                for c, w in p.weights.items():
                    out[c] = out.get(c, Fraction(0)) + lam * w
        return {c: out[c] for c in tree.nodes[node].children if out.get(c)}

    def kernels(self, tree: ScenarioTree) -> dict[NodeId, Kernel]:
        return {n: self.kernel(tree, n) for n in tree.internal}

    def check(self, tree: ScenarioTree) -> None:
        for n in tree.internal:
            c = self.mixture.get(n)
            if c is None or len(c) != len(tree.extremes(n)):
                raise ValueError(f"selection has no valid coefficients at {n!r}")
            if any(x < 0 for x in c) or sum(c) != 1:
                raise ValueError(f"coefficients at {n!r} are not convex weights")


Measure = Union[KernelSelection, Kernels]


def as_kernels(tree: ScenarioTree, m: Measure) -> Kernels:
    if isinstance(m, KernelSelection):
        return m.kernels(tree)
    if hasattr(m, "selection"):
        return as_kernels(tree, m.selection)
    return m


def uniform_selection(tree: ScenarioTree) -> KernelSelection:
    return KernelSelection({n: (Fraction(1, len(tree.extremes(n))),) * len(tree.extremes(n)) for n in tree.internal})


def onehot_selection(tree: ScenarioTree, choice: Mapping[NodeId, int]) -> KernelSelection:
    mix = {}
    for n in tree.internal:
        k = len(tree.extremes(n))
        i = choice.get(n, 0)
        mix[n] = tuple(Fraction(int(j == i)) for j in range(k))
    return KernelSelection(mix)


def extreme_selections(tree: ScenarioTree, limit: int | None = None) -> Iterator[KernelSelection]:
    """All one-hot selections (one extreme per node), in deterministic order."""
    internal = tree.internal
    ranges = [range(len(tree.extremes(n))) for n in internal]
    for k, combo in enumerate(itertools.product(*ranges)):
        if limit is not None and k >= limit:
            return
        yield onehot_selection(tree, dict(zip(internal, combo)))


def count_extreme_selections(tree: ScenarioTree) -> int:
    total = 1
    for n in tree.internal:
        total *= len(tree.extremes(n))
    return total


def uniform_mixture(priorset: PriorSet | Sequence[LocalPrior]) -> LocalPrior:
    ext = tuple(priorset)
    if not ext:
        raise ValueError("empty prior set")
    k = len(ext)
    out: dict[NodeId, Fraction] = {}
    for p in ext:
        for c, w in p.weights.items():
            out[c] = out.get(c, Fraction(0)) + w / k
    return LocalPrior(out)


def path_probability(tree: ScenarioTree, selection: Measure, node: NodeId) -> Fraction:
    ks = as_kernels(tree, selection)
    prob = Fraction(1)
    for parent, child in tree.edges(node):
        prob *= ks.get(parent, {}).get(child, Fraction(0))
        if not prob:
            return Fraction(0)
    return prob


def node_probabilities(tree: ScenarioTree, selection: Measure) -> dict[NodeId, Fraction]:
    """Path probability of every node, computed top-down in one pass."""
    ks = as_kernels(tree, selection)
    out = {tree.root: Fraction(1)}
    for n in tree.order:
        pn = out.get(n, Fraction(0))
        for c in tree.nodes[n].children:
            out[c] = pn * ks.get(n, {}).get(c, Fraction(0)) if pn else Fraction(0)
    return out


def charged_nodes(tree: ScenarioTree, selection: Measure) -> frozenset[NodeId]:
    """Nodes of positive probability; computed from supports only."""
    ks = as_kernels(tree, selection)
    seen, stack = {tree.root}, [tree.root]
    while stack:
        n = stack.pop()
        for c, w in ks.get(n, {}).items():
            if w > 0 and c in tree.nodes[n].children and c not in seen:
                seen.add(c)
                stack.append(c)
    return frozenset(seen)


def non_polar_nodes(tree: ScenarioTree) -> frozenset[NodeId]:
    return tree.non_polar


@dataclass(frozen=True)
class Strategy:
    """Holdings over the period following each listed node; missing nodes hold nothing."""

    holdings: Mapping[NodeId, Point] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "holdings", {n: point(h) for n, h in self.holdings.items()})

    def at(self, node: NodeId, d: int) -> Point:
        return self.holdings.get(node, (Fraction(0),) * d)

    def __add__(self, other: "Strategy") -> "Strategy":
        keys = list(dict.fromkeys(list(self.holdings) + list(other.holdings)))
        out = {}
        for n in keys:
            a = self.holdings.get(n)
            b = other.holdings.get(n)
            if a is None:
                out[n] = b
            elif b is None:
                out[n] = a
            else:
                out[n] = tuple(x + y for x, y in zip(a, b))
        return Strategy(out)


def portfolio_value(tree: ScenarioTree, strategy: Strategy, x, leaf: NodeId) -> Fraction:
    if not tree.node(leaf).is_leaf:
        raise ValueError(f"{leaf!r} is not a leaf")
    v = Fraction(x)
    for parent, child in tree.edges(leaf):
        v += dot(strategy.at(parent, tree.d), tree.delta(parent, child))
    return v


def is_arbitrage(tree: ScenarioTree, strategy: Strategy) -> bool:
    """V_T >= 0 on every non-polar leaf and > 0 on at least one."""
    vals = [portfolio_value(tree, strategy, 0, leaf) for leaf in tree.leaves if leaf in tree.non_polar]
    return all(v >= 0 for v in vals) and any(v > 0 for v in vals)
