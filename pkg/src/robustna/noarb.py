"""Quasi-sure, strong and weak no-arbitrage on scenario trees.

The quasi-sure condition is decided node by node (origin in the relative
interior of the convex hull of the union support).  An independent global
LP over all strategies is provided as a cross-check.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from ._parallel import pmap
from .geometry import (
    Point,
    affine_hull,
    dot,
    inradius_sq,
    linear_span,
    origin_in_relative_interior,
    point,
    solve_lp,
)
from .market import (
    KernelSelection,
    LocalPrior,
    Measure,
    NodeId,
    ScenarioTree,
    Strategy,
    as_kernels,
    charged_nodes,
    portfolio_value,
)
from .supports import SupportSet, selection_support, support_of_prior, union_support

NA_HOLDS = "NA_holds"
NA_FAILS = "NA_fails"

SPHERE_SAMPLES = 10_000
# Near-ties on the boundary {h.x = -beta} count as outside the event; this can
# only lower the reported kappa.
TIE_TOL = 1e-12


class NoConstantsError(ValueError):
    pass


@dataclass(frozen=True)
class LocalNAReport:
    node: NodeId
    support: SupportSet
    aff_dim: int
    ok: bool
    weights: tuple[Fraction, ...] | None = None
    direction: Point | None = None


@dataclass(frozen=True)
class QuantConstants:
    node: NodeId
    epsilon_sq: Fraction
    kappa: Fraction
    exact: bool

    @property
    def epsilon(self) -> float:
        return math.sqrt(self.epsilon_sq)

    @property
    def beta_sq(self) -> Fraction:
        return self.epsilon_sq / 4

    @property
    def beta(self) -> float:
        return self.epsilon / 2

    @property
    def alpha(self) -> float:
        return min(self.beta, float(self.kappa))


@dataclass(frozen=True)
class GlobalNAReport:
    verdict: str
    failing_node: NodeId | None = None
    arbitrage: Strategy | None = None
    per_node: dict[NodeId, LocalNAReport] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.verdict == NA_HOLDS


class StrongNA(NamedTuple):
    holds: bool
    witnesses: tuple[tuple[NodeId, int], ...]


class WeakNA(NamedTuple):
    holds: bool
    witness: KernelSelection | None


class SinglePriorNA(NamedTuple):
    holds: bool
    failing_node: NodeId | None
    direction: Point | None


class ArbitrageFound(NamedTuple):
    strategy: Strategy
    leaf: NodeId


@lru_cache(maxsize=65536)
def _interior(points: tuple[Point, ...]) -> bool:
    return origin_in_relative_interior(points).interior


def origin_interior(points: Iterable[Point]) -> bool:
    """Memoised boolean relative-interior test, keyed by the point set."""
    return _interior(tuple(sorted(set(points))))


def local_na(tree: ScenarioTree, node: NodeId) -> LocalNAReport:
    D = union_support(tree, node)  # raises on leaves
    cert = origin_in_relative_interior(D.points)
    return LocalNAReport(
        node=node,
        support=D,
        aff_dim=affine_hull(D.points).dim,
        ok=cert.interior,
        weights=cert.weights,
        direction=cert.direction,
    )


def _checked_nodes(tree: ScenarioTree) -> list[NodeId]:
    return [n for n in tree.internal if n in tree.non_polar]


def quasi_sure_na(tree: ScenarioTree) -> GlobalNAReport:
    nodes = _checked_nodes(tree)
    reports = pmap(lambda n: local_na(tree, n), nodes)
    per_node = dict(zip(nodes, reports))
    for n in nodes:  # tree.internal is already (time, id) ordered
        rep = per_node[n]
        if not rep.ok:
            strat = extract_arbitrage(tree, n, rep.direction)
            return GlobalNAReport(NA_FAILS, n, strat, per_node)
    return GlobalNAReport(NA_HOLDS, None, None, per_node)


def extract_arbitrage(tree: ScenarioTree, node: NodeId, h: Sequence) -> Strategy:
    h = point(h)
    if node not in tree.non_polar:
        raise ValueError(f"{node!r} is polar; no arbitrage can be lifted from it")
    if len(h) != tree.d:
        raise ValueError(f"direction has {len(h)} coordinates, expected d={tree.d}")
    vals = [dot(h, x) for x in union_support(tree, node)]
    if any(v < 0 for v in vals) or not any(v > 0 for v in vals):
        raise ValueError("direction does not weakly separate the support with a strict gain")
    return Strategy({node: h})


def global_arbitrage_search(tree: ScenarioTree) -> ArbitrageFound | None:
    """One LP over all strategies with holdings in [-1, 1]^d per node."""
    nodes = _checked_nodes(tree)
    leaves = [leaf for leaf in tree.leaves if leaf in tree.non_polar]
    d = tree.d
    col = {n: i * d for i, n in enumerate(nodes)}
    nv = len(nodes) * d
    if nv == 0:
        return None
    # g = h + 1 in [0, 2]; V(leaf) = sum_path (g - 1).delta = a.g + const
    A_ub, b_ub = [], []
    objective = [Fraction(0)] * nv
    consts = {}
    for leaf in leaves:
        a = [Fraction(0)] * nv
        const = Fraction(0)
        for parent, child in tree.edges(leaf):
            delta = tree.delta(parent, child)
            for k in range(d):
                a[col[parent] + k] += delta[k]
                const -= delta[k]
        consts[leaf] = const
        A_ub.append([-x for x in a])
        b_ub.append(const)
        objective = [o + x for o, x in zip(objective, a)]
    for j in range(nv):
        e = [0] * nv
        e[j] = 1
        A_ub.append(e)
        b_ub.append(2)
    res = solve_lp(objective, A_ub, b_ub)
    total = res.objective + sum(consts.values())
    if total <= 0:
        return None
    g = res.solution
    holdings = {}
    for n in nodes:
        h = tuple(g[col[n] + k] - 1 for k in range(d))
        if any(h):
            holdings[n] = h
    strat = Strategy(holdings)
    leaf = next(x for x in leaves if portfolio_value(tree, strat, 0, x) > 0)
    return ArbitrageFound(strat, leaf)


def strong_na(tree: ScenarioTree) -> StrongNA:
    witnesses = []
    for n in _checked_nodes(tree):
        for i, p in enumerate(tree.extremes(n)):
            if not origin_interior(support_of_prior(tree, n, p).points):
                witnesses.append((n, i))
    return StrongNA(not witnesses, tuple(witnesses))


def weak_na(tree: ScenarioTree) -> WeakNA:
    """Viability recursion: choose per node a subset of extremes whose mixture is locally arbitrage-free."""
    choice: dict[NodeId, tuple[int, ...] | None] = {}
    for n in reversed(tree.order):
        if tree.nodes[n].is_leaf:
            choice[n] = ()
            continue
        ext = tree.extremes(n)
        usable = [i for i, p in enumerate(ext) if all(choice[c] is not None for c in p.support)]
        supports = {i: support_of_prior(tree, n, ext[i]).points for i in usable}
        choice[n] = None
        for size in range(1, len(usable) + 1):
            for sub in itertools.combinations(usable, size):
                pts = {x for i in sub for x in supports[i]}
                if origin_interior(pts):
                    choice[n] = sub
                    break
            if choice[n] is not None:
                break
    if choice[tree.root] is None:
        return WeakNA(False, None)
    mix = {}
    for n in tree.internal:
        k = len(tree.extremes(n))
        sub = choice[n] or tuple(range(k))
        mix[n] = tuple(Fraction(1, len(sub)) if i in sub else Fraction(0) for i in range(k))
    return WeakNA(True, KernelSelection(mix))


def single_prior_na(tree: ScenarioTree, measure: Measure) -> SinglePriorNA:
    """NA(P) for one prior: local condition at every node the prior charges."""
    kernels = as_kernels(tree, measure)
    reached = charged_nodes(tree, kernels)
    for n in tree.internal:
        if n not in reached:
            continue
        pts = selection_support(tree, n, kernels).points
        if not origin_interior(pts):
            cert = origin_in_relative_interior(pts)
            return SinglePriorNA(False, n, cert.direction)
    return SinglePriorNA(True, None, None)


# -- quantitative constants ---------------------------------------------------


def _atoms(tree: ScenarioTree, node: NodeId, priors: Sequence[LocalPrior]):
    kids = tree.nodes[node].children
    deltas = {c: tree.delta(node, c) for c in kids}
    return [[(deltas[c], p.weight(c)) for c in kids if p.weight(c) > 0] for p in priors]


def _kappa_dim1(basis: Point, atoms, beta_sq: Fraction) -> Fraction:
    bb = dot(basis, basis)
    best = None
    for sign in (1, -1):
        worst = Fraction(0)
        for prior in atoms:
            mass = Fraction(0)
            for x, w in prior:
                s = sign * dot(basis, x)
                if s < 0 and s * s > beta_sq * bb:
                    mass += w
            worst = max(worst, mass)
        best = worst if best is None else min(best, worst)
    return best


def _orthonormal_coords(basis: list[Point], atoms):
    B = np.array([[float(v) for v in b] for b in basis]).T  # d x k
    Q, _ = np.linalg.qr(B)
    coords = [[(Q.T @ np.array([float(v) for v in x]), w) for x, w in prior] for prior in atoms]
    return coords


def _mass_at(h: np.ndarray, coords, beta: float) -> Fraction:
    worst = Fraction(0)
    for prior in coords:
        mass = sum((w for u, w in prior if float(h @ u) < -beta - TIE_TOL), Fraction(0))
        worst = max(worst, mass)
    return worst


def _kappa_dim2(coords, beta: float) -> Fraction:
    crit = []
    for prior in coords:
        for u, _ in prior:
            r = float(np.hypot(*u))
            if r > beta:
                phi = math.atan2(u[1], u[0])
                a = math.acos(-beta / r)
                crit += [(phi + a) % (2 * math.pi), (phi - a) % (2 * math.pi)]
    if not crit:
        return Fraction(0)
    crit = sorted(set(crit))
    probes = list(crit)
    for a, b in zip(crit, crit[1:] + [crit[0] + 2 * math.pi]):
        probes.append((a + b) / 2)
    best = None
    for th in probes:
        m = _mass_at(np.array([math.cos(th), math.sin(th)]), coords, beta)
        best = m if best is None else min(best, m)
    return best


def sphere_directions(k: int, n: int = SPHERE_SAMPLES) -> np.ndarray:
    if k == 3:
        i = np.arange(n) + 0.5
        z = 1 - 2 * i / n
        r = np.sqrt(1 - z * z)
        th = np.pi * (1 + 5**0.5) * i
        return np.stack([r * np.cos(th), r * np.sin(th), z], axis=1)
    rng = np.random.default_rng(0)
    g = rng.standard_normal((n, k))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


def _kappa_sampled(coords, beta: float, k: int) -> Fraction:
    H = sphere_directions(k)
    for_priors = []
    for prior in coords:
        U = np.array([u for u, _ in prior])
        W = np.array([float(w) for _, w in prior])
        hit = (H @ U.T) < -beta - TIE_TOL
        for_priors.append(hit @ W)
    worst = np.max(np.stack(for_priors, axis=1), axis=1)
    return _mass_at(H[int(np.argmin(worst))], coords, beta)


def _kappa(tree: ScenarioTree, node: NodeId, beta_sq: Fraction, priors=None) -> tuple[Fraction, bool]:
    if beta_sq <= 0:
        raise ValueError("beta must be positive")
    D = union_support(tree, node)
    basis = linear_span(D.points)
    k = len(basis)
    if k == 0:
        return Fraction(1), True
    priors = tuple(tree.extremes(node) if priors is None else priors)
    atoms = _atoms(tree, node, priors)
    if k == 1:
        return _kappa_dim1(basis[0], atoms, beta_sq), True
    coords = _orthonormal_coords(basis, atoms)
    beta = math.sqrt(beta_sq)
    if k == 2:
        return _kappa_dim2(coords, beta), True
    return _kappa_sampled(coords, beta, k), False


def kappa_for_beta(tree: ScenarioTree, node: NodeId, beta, priors: Iterable[LocalPrior] | None = None) -> Fraction:
    """inf over unit h in span(D) of max over priors of p(h.dS < -beta)."""
    beta = Fraction(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    return _kappa(tree, node, beta * beta, None if priors is None else tuple(priors))[0]


def quantitative_constants(tree: ScenarioTree, node: NodeId) -> QuantConstants:
    D = union_support(tree, node)
    try:
        eps_sq = inradius_sq(D.points)
    except ValueError:
        raise NoConstantsError(f"no quantitative constants: arbitrage at node {node}") from None
    if len(linear_span(D.points)) == 0:
        return QuantConstants(node, eps_sq, Fraction(1), True)
    kappa, exact = _kappa(tree, node, eps_sq / 4)
    return QuantConstants(node, eps_sq, kappa, exact)


def quantitative_na(tree: ScenarioTree) -> bool:
    """True iff constants with kappa > 0 exist at every non-polar non-leaf node."""
    for n in _checked_nodes(tree):
        try:
            qc = quantitative_constants(tree, n)
        except NoConstantsError:
            return False
        if qc.kappa <= 0:
            return False
    return True
