"""JSON model files: exact parsing into a ScenarioTree and canonical serialisation.

Layout::

    {"d": 1, "T": 1,
     "nodes": [
       {"id": "root", "t": 0, "price": ["1"], "children": ["up", "down"],
        "priors": [[["up", "1/3"], ["down", "2/3"]]]},
       {"id": "up", "t": 1, "price": ["2"]},
       {"id": "down", "t": 1, "price": ["0.5"]}]}

Numbers may be given as strings ("0.7", "7/10") or JSON numbers; both are
converted exactly.  Leaves omit ``children`` and ``priors``.
"""

from __future__ import annotations

import hashlib
import json
from fractions import Fraction

from .market import LocalPrior, Node, ScenarioTree, build_tree
from .models._labels import decimal_label


class ModelFileError(ValueError):
    pass


def rational(x) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


def decimal_or_rational(x) -> str:
    return decimal_label(Fraction(x))


def _exact(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (int, str, Fraction)):
        raise ModelFileError(f"{where}: expected a number or numeric string, got {value!r}")
    try:
        return Fraction(value.strip() if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError):
        raise ModelFileError(f"{where}: cannot read {value!r} as an exact number") from None


def _field(obj: dict, key: str, where: str, kind):
    if key not in obj:
        raise ModelFileError(f"{where}: missing field {key!r}")
    val = obj[key]
    if not isinstance(val, kind) or isinstance(val, bool):
        raise ModelFileError(f"{where}.{key}: wrong type {type(val).__name__}")
    return val


def parse_model(text: str) -> ScenarioTree:
    try:
        doc = json.loads(text, parse_float=Fraction)
    except json.JSONDecodeError as e:
        raise ModelFileError(f"line {e.lineno} column {e.colno}: {e.msg}") from None
    if not isinstance(doc, dict):
        raise ModelFileError("top level must be an object")
    d = _field(doc, "d", "model", int)
    T = _field(doc, "T", "model", int)
    raw_nodes = _field(doc, "nodes", "model", list)
    nodes = []
    for i, raw in enumerate(raw_nodes):
        where = f"nodes[{i}]"
        if not isinstance(raw, dict):
            raise ModelFileError(f"{where}: expected an object")
        nid = _field(raw, "id", where, str)
        t = _field(raw, "t", where, int)
        price = tuple(_exact(v, f"{where}.price[{k}]") for k, v in enumerate(_field(raw, "price", where, list)))
        children = tuple(raw.get("children", ()))
        if not all(isinstance(c, str) for c in children):
            raise ModelFileError(f"{where}.children: ids must be strings")
        priors = None
        if "priors" in raw:
            plist = _field(raw, "priors", where, list)
            extremes = []
            for j, prior in enumerate(plist):
                pw = f"{where}.priors[{j}]"
                if not isinstance(prior, list):
                    raise ModelFileError(f"{pw}: expected a list of [child, weight] pairs")
                weights = {}
                for k, pair in enumerate(prior):
                    if not (isinstance(pair, list) and len(pair) == 2 and isinstance(pair[0], str)):
                        raise ModelFileError(f"{pw}[{k}]: expected [child_id, weight]")
                    if pair[0] in weights:
                        raise ModelFileError(f"{pw}[{k}]: child {pair[0]!r} listed twice")
                    weights[pair[0]] = _exact(pair[1], f"{pw}[{k}]")
                extremes.append(LocalPrior(weights))
            priors = tuple(extremes)
        nodes.append(Node(nid, t, price, children, priors))
    ids = [n.id for n in nodes]
    if len(set(ids)) != len(ids):
        dup = sorted({x for x in ids if ids.count(x) > 1})
        raise ModelFileError(f"duplicate node ids: {', '.join(dup)}")
    try:
        return build_tree(d, T, nodes)
    except ValueError as e:
        raise ModelFileError(str(e)) from None


def model_to_dict(tree: ScenarioTree) -> dict:
    nodes = []
    for n in tree.order:
        rec = tree.nodes[n]
        item = {"id": rec.id, "t": rec.t, "price": [decimal_or_rational(x) for x in rec.price]}
        if rec.children:
            item["children"] = list(rec.children)
            item["priors"] = [[[c, rational(w)] for c, w in p.weights.items()] for p in rec.priors]
        nodes.append(item)
    return {"d": tree.d, "T": tree.T, "nodes": nodes}


def dump_model(tree: ScenarioTree) -> str:
    return json.dumps(model_to_dict(tree), indent=1) + "\n"


def digest(text: str | bytes) -> str:
    data = text.encode() if isinstance(text, str) else text
    return hashlib.sha256(data).hexdigest()
