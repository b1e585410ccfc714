"""One-dimensional discretised diffusion Y_{t+1} = Y_t + mu + sigma Z, in level and exponential form."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..market import LocalPrior, Node, NodeId, ScenarioTree, build_tree
from ._labels import child_id, decimal_label

NORMAL = "normal"
LOGNORMAL = "lognormal"


def normal_cdf(x: float) -> float:
    return 0.5 * math.erfc(-x / math.sqrt(2))


@dataclass(frozen=True)
class DiffusionSpec:
    T: int = 2
    r: Fraction = Fraction(0)
    sigma: Fraction = Fraction(1)
    grid: int = 21
    z_max: Fraction = Fraction(4)
    atoms: tuple = (Fraction(2),)
    y0: Fraction = Fraction(1)

    def check(self) -> None:
        if self.grid < 21 or self.grid % 2 == 0:
            raise ValueError(f"Z grid must be odd with at least 21 points, got {self.grid}")
        if Fraction(self.sigma) <= 0:
            raise ValueError("sigma must be positive")
        if Fraction(self.r) < 0:
            raise ValueError("the drift bound r must be non-negative")
        if self.T < 1:
            raise ValueError("T must be at least 1")
        for x in self.atoms:
            if Fraction(x) < 1:
                raise ValueError(f"q_x needs x >= 1 to be a probability law, got {x}")


def z_grid(m: int = 21, z_max=Fraction(4)) -> list[tuple[Fraction, Fraction]]:
    """Symmetric grid with normal-shaped weights, mean exactly 0 and variance exactly 1."""
    z_max = Fraction(z_max)
    half = m // 2
    step = z_max / half
    # integer weights keep denominators small for the exact LPs downstream
    raw = [round(10**6 * math.exp(-float(step * i) ** 2 / 2)) for i in range(half + 1)]
    total = raw[0] + 2 * sum(raw[1:])
    pos = [Fraction(w, total) for w in raw]
    var = 2 * sum(w * (step * i) ** 2 for i, w in enumerate(pos))
    # Move mass between the centre and one symmetric pair +-z_k to hit variance 1.
    for k in range(half, 0, -1):
        z2 = (step * k) ** 2
        eps = (1 - var) / z2  # total mass added to the pair
        if pos[k] + eps / 2 > 0 and pos[0] - eps > 0:
            pos[k] += eps / 2
            pos[0] -= eps
            break
    else:
        raise ValueError("cannot correct the grid variance to 1")
    out = [(-step * i, pos[i]) for i in range(half, 0, -1)]
    out += [(step * i, pos[i]) for i in range(half + 1)]
    return out


def _increment_laws(spec: DiffusionSpec) -> list[dict[Fraction, Fraction]]:
    r, sigma = Fraction(spec.r), Fraction(spec.sigma)
    zs = z_grid(spec.grid, spec.z_max)
    laws: list[dict[Fraction, Fraction]] = []
    for mu in (r, -r, Fraction(0)):
        law = {mu + sigma * z: w for z, w in zs}
        if law not in laws:
            laws.append(law)
    for x in spec.atoms:
        x = Fraction(x)
        law: dict[Fraction, Fraction] = {}
        for dy, w in ((r - sigma * x, 1 / (2 * x * x)), (r, 1 - 1 / (x * x)), (r + sigma * x, 1 / (2 * x * x))):
            if w:
                law[dy] = law.get(dy, Fraction(0)) + w
        if law not in laws:
            laws.append(law)
    return laws


def _price(y: Fraction, variant: str) -> Fraction:
    if variant == NORMAL:
        return y
    return Fraction(f"{math.exp(y):.12g}")


def gen_diffusion(spec: DiffusionSpec = DiffusionSpec()) -> dict[str, ScenarioTree]:
    """Both price variants: S = Y and S = exp(Y) (prices rounded to 12 significant digits)."""
    spec.check()
    laws = _increment_laws(spec)
    steps = sorted({dy for law in laws for dy in law})
    out = {}
    for variant in (NORMAL, LOGNORMAL):
        nodes: list[Node] = []

        def grow(nid: NodeId, t: int, y: Fraction):
            price = (_price(y, variant),)
            if t == spec.T:
                nodes.append(Node(nid, t, price))
                return
            kid = {dy: child_id(nid, decimal_label(dy)) for dy in steps}
            priors = tuple(LocalPrior({kid[dy]: w for dy, w in law.items()}) for law in laws)
            nodes.append(Node(nid, t, price, tuple(kid[dy] for dy in steps), priors))
            for dy in steps:
                grow(kid[dy], t + 1, y + dy)

        grow("root", 0, Fraction(spec.y0))
        out[variant] = build_tree(1, spec.T, nodes)
    return out


@dataclass(frozen=True)
class DiffusionAnalytics:
    beta_closed_form: float
    kappa_closed_form: float


def diffusion_analytics(spec: DiffusionSpec, tree: ScenarioTree, node: NodeId, variant: str) -> DiffusionAnalytics:
    r, sigma = float(spec.r), float(spec.sigma)
    ln2 = math.log(2)
    kappa = min(normal_cdf(-(ln2 + r) / sigma), 1 - normal_cdf((ln2 - r) / sigma))
    if variant == NORMAL:
        beta = ln2
    elif variant == LOGNORMAL:
        beta = 0.5 * min(1.0, float(tree.node(node).price[0]))
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return DiffusionAnalytics(beta, kappa)


def base_tail_mass(tree: ScenarioTree, node: NodeId, h: int, beta: float) -> Fraction:
    """Mass of {h * dS < -beta} under the base prior (the first extreme)."""
    p0 = tree.extremes(node)[0]
    return sum(
        (w for c, w in p0.weights.items() if h * float(tree.delta(node, c)[0]) < -beta),
        Fraction(0),
    )
