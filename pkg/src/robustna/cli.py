"""Command-line front end.

Exit codes: 0 when no arbitrage is found, 1 when the market admits one,
2 on unreadable or invalid input.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import report as rpt
from .ftap import martingale_measure
from .market import ScenarioTree, uniform_selection
from .modelfile import ModelFileError, decimal_or_rational, digest, dump_model, parse_model
from .models import (
    BinomialSpec,
    DiffusionSpec,
    fixture,
    fixture_names,
    gen_binomial,
    gen_binomial_sna_fail,
    gen_diffusion,
)
from .models.diffusion import LOGNORMAL, NORMAL
from .noarb import global_arbitrage_search, quantitative_constants, quasi_sure_na, strong_na, weak_na
from .pstar import NoPStarError, construct_pstar

EXIT_OK, EXIT_ARBITRAGE, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    pass


def _load(path: str) -> tuple[ScenarioTree, str]:
    try:
        raw = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as e:
        raise InputError(f"{path}: {e.strerror}") from None
    try:
        return parse_model(raw), digest(raw)
    except ModelFileError as e:
        raise InputError(f"{path}: {e}") from None


def _fmt_vec(p) -> str:
    return "(" + ", ".join(decimal_or_rational(x) for x in p) + ")"


def _emit(args, doc: dict, lines: list[str]) -> None:
    if args.json:
        sys.stdout.write(rpt.dumps(doc))
    else:
        sys.stdout.write("".join(line + "\n" for line in lines))


def cmd_check(args) -> int:
    tree, dig = _load(args.model)
    qs = quasi_sure_na(tree)
    sna = strong_na(tree)
    wna = weak_na(tree)
    doc = rpt.check_report(tree, dig, qs, sna, wna)
    lines = [f"NA: {'holds' if qs.holds else 'fails'}",
             f"sNA: {'holds' if sna.holds else 'fails'}",
             f"wNA: {'holds' if wna.holds else 'fails'}"]
    if not qs.holds:
        lines.append(f"arbitrage at node {qs.failing_node}:")
        lines += [f"  hold {_fmt_vec(h)} at {n}" for n, h in qs.arbitrage.holdings.items()]
    for n, i in sna.witnesses:
        lines.append(f"prior {i} at node {n} admits arbitrage")
    _emit(args, doc, lines)
    return EXIT_OK if qs.holds else EXIT_ARBITRAGE


def cmd_constants(args) -> int:
    tree, dig = _load(args.model)
    qs = quasi_sure_na(tree)
    doc = rpt.header("constants", dig)
    if not qs.holds:
        doc["failing_node"] = qs.failing_node
        doc["nodes"] = []
        _emit(args, doc, [f"NA fails at node {qs.failing_node}; no constants"])
        return EXIT_ARBITRAGE
    rows = [quantitative_constants(tree, n) for n in qs.per_node]
    doc["failing_node"] = None
    doc["nodes"] = [rpt.constants_json(q, tree.nodes[q.node].t) for q in rows]
    lines = [f"{'node':<24} {'epsilon':>10} {'beta':>10} {'kappa':>10} {'alpha':>10}  exact"]
    for q in rows:
        lines.append(f"{q.node:<24} {q.epsilon:>10.6g} {q.beta:>10.6g} {float(q.kappa):>10.6g} "
                     f"{q.alpha:>10.6g}  {'yes' if q.exact else 'no'}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_pstar(args) -> int:
    tree, dig = _load(args.model)
    try:
        ps = construct_pstar(tree)
    except NoPStarError as e:
        doc = rpt.header("pstar", dig)
        doc["pstar"] = None
        _emit(args, doc, [str(e)])
        return EXIT_ARBITRAGE
    doc = rpt.pstar_report(tree, dig, ps)
    lines = []
    for n, kern in doc["pstar_kernels"].items():
        lines.append(f"{n}: " + ", ".join(f"{c} {w}" for c, w in kern.items()))
    lines.append(f"checks: {'ok' if ps.valid else 'FAILED'}")
    _emit(args, doc, lines)
    return EXIT_OK


def cmd_martingale(args) -> int:
    tree, dig = _load(args.model)
    try:
        reference = construct_pstar(tree).selection
    except NoPStarError:
        reference = uniform_selection(tree)
    res = martingale_measure(tree, reference)
    doc = rpt.martingale_report(dig, res)
    if res.exists:
        lines = [f"{leaf}: {w}" for leaf, w in doc["martingale_measure"].items()]
    else:
        lines = [f"no martingale measure: {res.reason}"]
    _emit(args, doc, lines)
    return EXIT_OK if res.exists else EXIT_ARBITRAGE


def cmd_arbitrage(args) -> int:
    tree, dig = _load(args.model)
    found = global_arbitrage_search(tree)
    doc = rpt.header("arbitrage", dig)
    doc["arbitrage"] = rpt.strategy_json(found.strategy) if found else None
    doc["witness_leaf"] = found.leaf if found else None
    if found:
        lines = [f"arbitrage, strict gain at leaf {found.leaf}:"]
        lines += [f"  hold {_fmt_vec(h)} at {n}" for n, h in found.strategy.holdings.items()]
    else:
        lines = ["no arbitrage"]
    _emit(args, doc, lines)
    return EXIT_ARBITRAGE if found else EXIT_OK


def _interval(text: str) -> tuple[Fraction, Fraction]:
    try:
        parts = [Fraction(x) for x in text.split(":")]
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad interval {text!r}") from None
    if len(parts) == 1:
        return parts[0], parts[0]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"interval must be LO:HI, got {text!r}")
    return parts[0], parts[1]


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"bad number {text!r}") from None


def _write(args, text: str) -> None:
    if args.output in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(args.output).write_text(text)


def cmd_gen(args) -> int:
    try:
        if args.family == "binomial":
            spec = BinomialSpec(T=args.T, pi=args.pi, u=args.u, d=args.dn, grid=args.grid, N=args.N, M=args.M)
            if args.sna_fail:
                tree, _ = gen_binomial_sna_fail(spec, a=args.a)
            else:
                tree = gen_binomial(spec)
        else:
            spec = DiffusionSpec(T=args.T, r=args.r, sigma=args.sigma, grid=args.grid, atoms=tuple(args.atoms))
            tree = gen_diffusion(spec)[args.variant]
    except ValueError as e:
        raise InputError(str(e)) from None
    _write(args, dump_model(tree))
    return EXIT_OK


def cmd_fixture(args) -> int:
    if args.action == "list":
        sys.stdout.write("".join(n + "\n" for n in fixture_names()))
        return EXIT_OK
    try:
        tree, _ = fixture(args.name)
    except KeyError as e:
        raise InputError(e.args[0]) from None
    _write(args, dump_model(tree))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable report on stdout")
    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("model", help="model file (JSON), or - for stdin")
    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("-o", "--output", help="write the model file here instead of stdout")

    p = argparse.ArgumentParser(prog="robustna", description="No-arbitrage analysis of multiple-priors scenario trees.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    for name, fn, help_ in (
        ("check", cmd_check, "decide quasi-sure, strong and weak no-arbitrage"),
        ("constants", cmd_constants, "per-node quantitative constants"),
        ("pstar", cmd_pstar, "construct the dominating arbitrage-free prior"),
        ("martingale", cmd_martingale, "equivalent martingale measure for the dominating prior"),
        ("arbitrage", cmd_arbitrage, "global LP search for an arbitrage strategy"),
    ):
        sp = sub.add_parser(name, parents=[common, model], help=help_)
        sp.set_defaults(func=fn)

    gen = sub.add_parser("gen", help="generate a model file")
    gsub = gen.add_subparsers(dest="family", required=True)
    b = gsub.add_parser("binomial", parents=[out], help="robust binomial tree")
    b.add_argument("--T", type=int, default=2)
    b.add_argument("--pi", type=_interval, default=(Fraction(3, 10), Fraction(6, 10)))
    b.add_argument("--u", type=_interval, default=(Fraction(11, 10), Fraction(13, 10)))
    b.add_argument("--dn", type=_interval, default=(Fraction(7, 10), Fraction(9, 10)))
    b.add_argument("--grid", type=int, default=2)
    b.add_argument("--N", type=_fraction, default=Fraction(2))
    b.add_argument("--M", type=_fraction, default=Fraction(2))
    b.add_argument("--sna-fail", action="store_true", help="add a losing up factor a in [u, 1)")
    b.add_argument("--a", type=_fraction, default=None)
    b.set_defaults(func=cmd_gen)
    df = gsub.add_parser("diffusion", parents=[out], help="discretised one-dimensional diffusion")
    df.add_argument("--T", type=int, default=2)
    df.add_argument("--r", type=_fraction, default=Fraction(0))
    df.add_argument("--sigma", type=_fraction, default=Fraction(1))
    df.add_argument("--grid", type=int, default=21)
    df.add_argument("--atoms", type=_fraction, nargs="+", default=[Fraction(2)])
    df.add_argument("--variant", choices=(NORMAL, LOGNORMAL), default=NORMAL)
    df.set_defaults(func=cmd_gen)

    fx = sub.add_parser("fixture", help="built-in example markets")
    fsub = fx.add_subparsers(dest="action", required=True)
    fsub.add_parser("list").set_defaults(func=cmd_fixture)
    em = fsub.add_parser("emit", parents=[out])
    em.add_argument("name")
    em.set_defaults(func=cmd_fixture)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_INPUT if e.code else EXIT_OK
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
