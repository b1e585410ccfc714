"""Robust binomial market: up/down moves with uncertain sizes and probabilities."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, Union

from ..market import KernelSelection, LocalPrior, Node, NodeId, ScenarioTree, build_tree
from ._labels import child_id, decimal_label

Bounds = Union[tuple, Sequence[tuple]]


def _is_pair(b) -> bool:
    return len(b) == 2 and not isinstance(b[0], (tuple, list))


@dataclass(frozen=True)
class BinomialSpec:
    """Interval bounds for the up-probability pi, up factor u and down factor d.

    Each bound is either one ``(lo, hi)`` pair used at every time or a list
    of ``T`` pairs.  ``grid`` is the number of grid points per interval
    (one int for all three, or a ``(n_pi, n_u, n_d)`` triple); grids always
    contain both endpoints.
    """

    T: int
    pi: Bounds
    u: Bounds
    d: Bounds
    grid: int | tuple[int, int, int] = 2
    N: Fraction = Fraction(2)
    M: Fraction = Fraction(2)

    def bounds(self, name: str, t: int) -> tuple[Fraction, Fraction]:
        b = getattr(self, name)
        if not _is_pair(b):
            if len(b) != self.T:
                raise ValueError(f"{name} needs one pair per time step, got {len(b)}")
            b = b[t]
        lo, hi = Fraction(b[0]), Fraction(b[1])
        if lo > hi:
            raise ValueError(f"{name} bounds reversed at t={t}: {lo} > {hi}")
        return lo, hi

    def counts(self) -> tuple[int, int, int]:
        g = self.grid
        return (g, g, g) if isinstance(g, int) else tuple(g)

    def check(self, allow_low_u: bool = True) -> None:
        if self.T < 1:
            raise ValueError("T must be at least 1")
        if Fraction(self.N) <= 1 or Fraction(self.M) <= 1:
            raise ValueError("scale factors N and M must exceed 1")
        for t in range(self.T):
            p_lo, p_hi = self.bounds("pi", t)
            u_lo, u_hi = self.bounds("u", t)
            d_lo, _ = self.bounds("d", t)
            if not (0 <= p_lo and p_hi <= 1):
                raise ValueError(f"probability bounds outside [0, 1] at t={t}")
            if not (p_lo < 1 and p_hi > 0):
                raise ValueError(f"Assumption violated at t={t}: need pi < 1 and Pi > 0")
            if not (0 < d_lo < 1 < u_hi):
                raise ValueError(f"Assumption violated at t={t}: need 0 < d < 1 < U")


def grid(lo: Fraction, hi: Fraction, n: int) -> list[Fraction]:
    if lo == hi:
        return [lo]
    if n < 2:
        raise ValueError("a grid over a non-degenerate interval needs at least 2 points")
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


def _extremes(spec: BinomialSpec, t: int, extra_u: Fraction | None = None) -> list[dict[Fraction, Fraction]]:
    n_pi, n_u, n_d = spec.counts()
    pis = grid(*spec.bounds("pi", t), n_pi)
    us = grid(*spec.bounds("u", t), n_u)
    if extra_u is not None and extra_u not in us:
        us.append(extra_u)
    ds = grid(*spec.bounds("d", t), n_d)
    out: list[dict[Fraction, Fraction]] = []
    for p in pis:
        for u in us:
            for d in ds:
                law: dict[Fraction, Fraction] = {}
                for y, w in ((u, p), (d, 1 - p)):
                    if w:
                        law[y] = law.get(y, Fraction(0)) + w
                if law not in out:
                    out.append(law)
    return out


def _build(spec: BinomialSpec, extra_u=None) -> ScenarioTree:
    laws = [_extremes(spec, t, extra_u) for t in range(spec.T)]
    nodes: list[Node] = []

    def grow(nid: NodeId, t: int, S: Fraction):
        if t == spec.T:
            nodes.append(Node(nid, t, (S,)))
            return
        ys = sorted({y for law in laws[t] for y in law})
        kid = {y: child_id(nid, decimal_label(y)) for y in ys}
        priors = tuple(LocalPrior({kid[y]: w for y, w in law.items()}) for law in laws[t])
        nodes.append(Node(nid, t, (S,), tuple(kid[y] for y in ys), priors))
        for y in ys:
            grow(kid[y], t + 1, S * y)

    grow("root", 0, Fraction(1))
    return build_tree(1, spec.T, nodes)


def gen_binomial(spec: BinomialSpec) -> ScenarioTree:
    spec.check()
    return _build(spec)


def gen_binomial_sna_fail(spec: BinomialSpec, a=None) -> tuple[ScenarioTree, KernelSelection]:
    """Binomial tree with an up factor a in [u, 1) and the all-down selection it permits.

    The witness charges only moves below 1 at every node, so that single
    prior has an arbitrage while the family as a whole does not.
    """
    spec.check()
    u_lo = [spec.bounds("u", t)[0] for t in range(spec.T)]
    if any(u >= 1 for u in u_lo):
        raise ValueError("the lower up-factor bound must be below 1 for some up move to lose")
    if a is not None:
        a = Fraction(a)
        if any(not (u <= a < 1) for u in u_lo):
            raise ValueError(f"a={a} must lie in [u, 1)")
    choices = []
    for t in range(spec.T):
        at = a if a is not None else (u_lo[t] + 1) / 2
        choices.append(at)
    if len(set(choices)) != 1:
        raise ValueError("time-varying u bounds need an explicit a")
    a = choices[0]
    tree = _build(spec, extra_u=a)
    mix = {}
    for n in tree.internal:
        t = tree.nodes[n].t
        p_hi = spec.bounds("pi", t)[1]
        d_lo = spec.bounds("d", t)[0]
        target: dict[Fraction, Fraction] = {}
        for y, w in ((a, p_hi), (d_lo, 1 - p_hi)):
            if w:
                target[y] = target.get(y, Fraction(0)) + w
        S = tree.nodes[n].price[0]
        want = LocalPrior({c: w for y, w in target.items() for c in tree.nodes[n].children
                           if tree.nodes[c].price[0] == S * y})
        ext = tree.extremes(n)
        idx = ext.index(want)
        mix[n] = tuple(Fraction(int(i == idx)) for i in range(len(ext)))
    return tree, KernelSelection(mix)


@dataclass(frozen=True)
class BinomialAnalytics:
    S: Fraction
    hull: tuple[Fraction, Fraction]
    epsilon_closed_form: Fraction
    beta_closed_form: Fraction
    kappa_closed_form: Fraction
    pstar_kernel: dict[Fraction, Fraction]  # law of the gross return Y


def binomial_analytics(spec: BinomialSpec, tree: ScenarioTree, node: NodeId) -> BinomialAnalytics:
    rec = tree.node(node)
    if rec.is_leaf:
        raise ValueError(f"{node!r} is a leaf")
    t, S = rec.t, rec.price[0]
    p_lo, p_hi = spec.bounds("pi", t)
    u, U = spec.bounds("u", t)
    d, D = spec.bounds("d", t)
    N, M = Fraction(spec.N), Fraction(spec.M)
    pbar = (p_lo + p_hi) / 2
    beta = S / N * min((U - 1) / 2, (1 - d) / 2)
    kappa = min(pbar, 1 - pbar) / M
    a_plus, b_plus = U, min(D, (d + 1) / 2)
    a_minus, b_minus = max(u, (U + 1) / 2), d
    law: dict[Fraction, Fraction] = {}
    for y, w in ((a_plus, pbar), (b_plus, 1 - pbar), (a_minus, pbar), (b_minus, 1 - pbar)):
        if w:
            law[y] = law.get(y, Fraction(0)) + w / 2
    return BinomialAnalytics(
        S=S,
        hull=(S * (d - 1), S * (U - 1)),
        epsilon_closed_form=2 * beta,
        beta_closed_form=beta,
        kappa_closed_form=kappa,
        pstar_kernel=dict(sorted(law.items())),
    )
