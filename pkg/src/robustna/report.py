"""Machine-readable reports.  Exact rationals are written as "num/den" strings."""

from __future__ import annotations

import json
from fractions import Fraction
from typing import Mapping

from . import __version__
from .ftap import MartingaleResult
from .market import KernelSelection, ScenarioTree, Strategy
from .modelfile import rational
from .noarb import GlobalNAReport, LocalNAReport, QuantConstants, StrongNA, WeakNA
from .pstar import PStarSelection

TOOL = "robustna"

_RAT = {"type": "string", "pattern": r"^-?[0-9]+/[0-9]+$"}
_VEC = {"type": "array", "items": _RAT}
_SELECTION = {"type": "object", "additionalProperties": {"type": "array", "items": _RAT}}
_NUM = {"type": "number"}

REPORT_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["tool", "version", "command", "input_sha256"],
    "properties": {
        "tool": {"const": TOOL},
        "version": {"type": "string"},
        "command": {"enum": ["check", "constants", "pstar", "martingale", "arbitrage"]},
        "input_sha256": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "verdicts": {
            "type": "object",
            "properties": {"NA": {"type": "boolean"}, "sNA": {"type": "boolean"}, "wNA": {"type": "boolean"}},
        },
        "failing_node": {"type": ["string", "null"]},
        "arbitrage": {"type": ["object", "null"], "additionalProperties": _VEC},
        "witness_leaf": {"type": ["string", "null"]},
        "nodes": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["id"],
                "properties": {
                    "id": {"type": "string"},
                    "t": {"type": "integer"},
                    "support": {"type": "array", "items": _VEC},
                    "aff_dim": {"type": "integer"},
                    "ok": {"type": "boolean"},
                    "weights": {"type": ["array", "null"], "items": _RAT},
                    "direction": {"type": ["array", "null"], "items": _RAT},
                    "epsilon": _NUM,
                    "epsilon_sq": _RAT,
                    "beta": _NUM,
                    "kappa": _RAT,
                    "alpha": _NUM,
                    "exact": {"type": "boolean"},
                },
            },
        },
        "sna_witnesses": {"type": "array", "items": {"type": "array"}},
        "wna_witness": {"anyOf": [_SELECTION, {"type": "null"}]},
        "pstar": {"anyOf": [_SELECTION, {"type": "null"}]},
        "pstar_kernels": {"type": "object"},
        "martingale_measure": {"type": ["object", "null"], "additionalProperties": _RAT},
        "reason": {"type": "string"},
    },
}


def header(command: str, input_digest: str) -> dict:
    return {"tool": TOOL, "version": __version__, "command": command, "input_sha256": input_digest}


def vec(p) -> list[str]:
    return [rational(x) for x in p]


def selection_json(sel: KernelSelection | None) -> dict | None:
    if sel is None:
        return None
    return {n: vec(c) for n, c in sorted(sel.mixture.items())}


def strategy_json(s: Strategy | None) -> dict | None:
    if s is None:
        return None
    return {n: vec(h) for n, h in s.holdings.items()}


def local_json(tree: ScenarioTree, rep: LocalNAReport) -> dict:
    return {
        "id": rep.node,
        "t": tree.nodes[rep.node].t,
        "support": [vec(p) for p in rep.support.points],
        "aff_dim": rep.aff_dim,
        "ok": rep.ok,
        "weights": vec(rep.weights) if rep.weights is not None else None,
        "direction": vec(rep.direction) if rep.direction is not None else None,
    }


def check_report(tree, digest, qs: GlobalNAReport, sna: StrongNA, wna: WeakNA) -> dict:
    out = header("check", digest)
    out["verdicts"] = {"NA": qs.holds, "sNA": sna.holds, "wNA": wna.holds}
    out["failing_node"] = qs.failing_node
    out["arbitrage"] = strategy_json(qs.arbitrage)
    out["nodes"] = [local_json(tree, r) for r in qs.per_node.values()]
    out["sna_witnesses"] = [[n, i] for n, i in sna.witnesses]
    out["wna_witness"] = selection_json(wna.witness)
    return out


def constants_json(qc: QuantConstants, t: int) -> dict:
    return {
        "id": qc.node,
        "t": t,
        "epsilon": qc.epsilon,
        "epsilon_sq": rational(qc.epsilon_sq),
        "beta": qc.beta,
        "kappa": rational(qc.kappa),
        "alpha": qc.alpha,
        "exact": qc.exact,
    }


def pstar_report(tree, digest, ps: PStarSelection) -> dict:
    out = header("pstar", digest)
    out["pstar"] = selection_json(ps.selection)
    out["pstar_kernels"] = {
        n: {c: rational(w) for c, w in ps.selection.kernel(tree, n).items()} for n in tree.internal
    }
    out["nodes"] = [
        {"id": n, "t": tree.nodes[n].t, "ok": c.support_equal and c.interior} for n, c in ps.checks.items()
    ]
    return out


def martingale_report(digest, res: MartingaleResult) -> dict:
    out = header("martingale", digest)
    m = res.measure
    out["martingale_measure"] = None if m is None else {k: rational(v) for k, v in sorted(m.leaf_weights.items())}
    out["reason"] = res.reason
    return out


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, indent=2) + "\n"


def parse_rational(s: str) -> Fraction:
    return Fraction(s)
