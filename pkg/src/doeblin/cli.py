"""Command-line surface: machine-readable JSON on stdout, notes on stderr.

Subcommands: coef, couple, degroot, bayesnet, fuse, verify.  Exit code 0 on
success, 1 on parse/validation errors (the message names the failing
invariant), 2 on infeasible requests (no consensus, coupling condition
violated).  Output is byte-identical for identical inputs and seeds; every
float is printed with 17 significant digits so values round-trip exactly.
The DOEBLIN_EXPANSION_CAP environment variable overrides the coupling
expansion cap.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bayesnet as bn
from . import coupling as cp
from . import degroot as dg
from . import lp
from .channel import Channel, as_channel, doeblin, max2_doeblin, max_doeblin, report
from .exceptions import InfeasibilityError, ValidationError
from .fusion import fuse_min


# ---------------------------------------------------------------------------
# Deterministic JSON with round-trip-safe floats
# ---------------------------------------------------------------------------


def _format_float(x: float) -> str:
    if x != x or x in (float("inf"), float("-inf")):
        raise ValueError("refusing to emit a non-finite number")
    return format(float(x), ".17g")


def dumps(obj, indent: int = 0) -> str:
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if obj is None or isinstance(obj, bool) or isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(obj)
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [dumps(v, indent + 1) for v in obj]
        if all("\n" not in it and len(it) < 20 for it in items) and len(items) <= 12:
            return "[" + ", ".join(items) + "]"
        return "[\n" + ",\n".join(inner + it for it in items) + "\n" + pad + "]"
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        parts = [
            json.dumps(str(k)) + ": " + dumps(v, indent + 1) for k, v in obj.items()
        ]
        return "{\n" + ",\n".join(inner + p for p in parts) + "\n" + pad + "}"
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _emit(obj) -> None:
    sys.stdout.write(dumps(obj) + "\n")


def _note(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# Input loading
# ---------------------------------------------------------------------------


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read {path}: {exc}") from exc


def load_channel(path: str) -> Channel:
    """Load a channel from JSON ({"rows": ...}) or CSV, by content sniffing."""
    text = _read(path)
    stripped = text.lstrip()
    if stripped.startswith("{"):
        return Channel.from_json(text)
    return Channel.from_csv(text)


def load_pmfs(paths) -> list[list[float]]:
    """Each path holds one JSON array, a JSON list of arrays, a JSON channel
    object, or CSV lines (one PMF per line)."""
    out: list[list[float]] = []
    for path in paths:
        text = _read(path)
        stripped = text.lstrip()
        if stripped.startswith("{"):
            out.extend([list(row) for row in Channel.from_json(text).matrix])
        elif stripped.startswith("["):
            try:
                obj = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ValidationError(f"invalid PMF JSON in {path}: {exc}") from exc
            if obj and isinstance(obj[0], list):
                out.extend(obj)
            else:
                out.append(obj)
        else:
            out.extend([list(row) for row in Channel.from_csv(text).matrix])
    return out


def _expansion_cap(args) -> int:
    if args.expansion_cap is not None:
        return args.expansion_cap
    env = os.environ.get("DOEBLIN_EXPANSION_CAP")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"DOEBLIN_EXPANSION_CAP must be an integer, got {env!r}")
    return cp.DEFAULT_EXPANSION_CAP


# ---------------------------------------------------------------------------
# Subcommand bodies
# ---------------------------------------------------------------------------


def _cmd_coef(args) -> int:
    ch = load_channel(args.channel)
    rep = report(ch)
    out = {"n": ch.n, "m": ch.m}
    out.update(rep.to_dict())
    _emit(out)
    return 0


def _cmd_couple(args) -> int:
    cap = _expansion_cap(args)
    if args.kind == "joint":
        try:
            obj = json.loads(_read(args.inputs[0]))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"invalid joint JSON: {exc}") from exc
        if not isinstance(obj, dict) or "joints" not in obj:
            raise ValidationError('joint coupling input must be {"joints": [...]}')
        jc = cp.simultaneous_joint_coupling(obj["joints"])
        out = {
            "kind": "joint",
            "arity": jc.arity,
            "achieved": {
                "pair_diagonal_mass": jc.prob_all_equal(),
                "x_diagonal_mass": jc.prob_x_equal(),
            },
            "coupling": jc.to_dict(),
        }
        _emit(out)
        return 0

    pmfs = load_pmfs(args.inputs)
    if args.kind == "max":
        built = cp.maximal_coupling(pmfs)
        achieved = {"diagonal_mass": doeblin(as_channel(pmfs))}
    elif args.kind == "min":
        built = cp.minimal_coupling_max(pmfs)
        achieved = {"union_mass": max_doeblin(as_channel(pmfs))}
    elif args.kind == "min3":
        if len(pmfs) != 3:
            raise ValidationError("--kind min3 needs exactly three PMFs")
        built = cp.minimal_coupling_max_n3(*pmfs)
        tmax = max_doeblin(as_channel(pmfs))
        tmax2 = max2_doeblin(as_channel(pmfs))
        achieved = {"union_mass": tmax + max(tmax2 - 1.0, 0.0)}
    else:
        raise ValidationError(f"unknown coupling kind {args.kind!r}")
    include = args.expand and built.alphabet_size**built.arity <= cap
    if args.expand and not include:
        _note(f"expansion skipped: table would exceed the cap of {cap} entries")
    out = {
        "kind": args.kind,
        "arity": built.arity,
        "alphabet": built.alphabet_size,
        "achieved": achieved,
        "coupling": built.to_dict(include_expanded=include, cap=cap),
    }
    _emit(out)
    return 0


def _cmd_degroot(args) -> int:
    ch = load_channel(args.channel)
    try:
        prior = json.loads(args.prior)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"--prior must be a JSON array: {exc}") from exc
    out = {
        "min_degroot": dg.min_degroot(prior, ch),
        "max_degroot": dg.max_degroot(prior, ch),
    }
    kinds = {"id": "identity", "complement": "complement"}
    wanted = [args.loss] if args.loss else ["id", "complement"]
    risks = []
    for key in wanted:
        kind = kinds[key]
        est = dg.optimal_estimator(prior, ch, kind)
        L = dg.identity_loss(ch.n) if kind == "identity" else dg.complement_loss(ch.n)
        risks.append(
            {
                "loss": key,
                "prior_risk": dg.prior_risk(prior, ch.n, kind),
                "bayes_risk": dg.risk(prior, ch, L, est),
            }
        )
    out["risks"] = risks
    _emit(out)
    return 0


def _cmd_bayesnet(args) -> int:
    net = bn.BayesNet.from_json(_read(args.net))
    targets = sorted(net.index_of(name.strip()) for name in args.target.split(","))
    names = [net.nodes[i].name for i in targets]
    out: dict = {"target": names}
    try:
        tau = doeblin(bn.composite_channel(net, targets))
        out["tau"] = tau
        out["gamma"] = 1.0 - tau
    except ValidationError:
        out["tau"] = None
        out["gamma"] = None
        _note("composite channel exceeds the enumeration cap; bounds only")
    bounds: dict = {}
    which = args.bound
    if which in ("recursion", "all"):
        bounds["recursion"] = _recursion_report(net, targets)
    if which in ("perc", "all"):
        if args.mc is not None:
            samples, seed = args.mc
            res = bn.percolation(net, targets, mode="mc", samples=samples, seed=seed)
        else:
            res = bn.percolation(net, targets, mode="exact")
        bounds["percolation"] = res.to_dict()
    if which in ("sfpaths", "all"):
        value, paths = bn.shortcut_free_bound(net, targets)
        bounds["shortcut_free"] = {
            "bound": value,
            "paths": [[net.nodes[u].name for u in p] for p in paths],
        }
    out["bounds"] = bounds
    _emit(out)
    return 0


def _recursion_report(net, targets) -> dict:
    """Apply the one-step recursion at the topologically last target."""
    candidates = [u for u in targets if u != net.source]
    if not candidates:
        return {"note": "no non-source target to recurse on"}
    u = max(candidates)
    rest = [v for v in targets if v != u]
    value = bn.recursion_bound(net, rest, u)
    return {
        "u": net.nodes[u].name,
        "tau_u": bn.node_tau(net, u),
        "lower_bound_on_tau": value,
    }


def _cmd_fuse(args) -> int:
    pmfs = load_pmfs(args.pmfs)
    result = fuse_min(pmfs)
    _emit({"fused": result.fused.to_list(), "agreement": result.agreement})
    return 0


def _cmd_verify(args) -> int:
    pmfs = load_pmfs(args.inputs)
    ch = as_channel(pmfs)
    if args.problem == "estimator":
        sense = args.sense or "min"
        value, witness = lp.estimator_opt(ch, sense)
        closed = doeblin(ch) / ch.n if sense == "min" else max_doeblin(ch) / ch.n
        out = {
            "problem": "estimator",
            "sense": sense,
            "value": value,
            "closed_form": closed,
            "gap": abs(value - closed),
            "paper_backed": True,
        }
        if args.witness:
            out["witness"] = witness.to_dict()
        _emit(out)
        return 0

    if args.problem == "diag":
        sense = args.sense or "max"
        res = lp.coupling_diag_opt(pmfs, sense, exact=args.exact)
        closed = doeblin(ch) if sense == "max" else None
    elif args.problem == "union":
        sense = args.sense or "min"
        res = lp.coupling_union_opt(pmfs, sense, exact=args.exact)
        if sense != "min":
            closed = None
        else:
            tmax2 = max2_doeblin(ch)
            if tmax2 <= 1.0 + 1e-12:
                closed = max_doeblin(ch)
            elif ch.n == 3:
                closed = max_doeblin(ch) + (tmax2 - 1.0)
            else:
                closed = None  # open beyond three marginals; the LP value is empirical
                _note(
                    "no closed form is known for this regime; "
                    "the reported value is the LP optimum only"
                )
    else:
        raise ValidationError(f"unknown problem {args.problem!r}")
    out = {
        "problem": args.problem,
        "sense": sense,
        "value": res.value,
        "closed_form": closed,
        "gap": None if closed is None else abs(res.value - closed),
        "paper_backed": closed is not None,
        "residuals": {
            "max_marginal": res.max_marginal_residual,
            "min_mass": res.min_mass,
            "duality_gap": res.duality_gap,
        },
    }
    if args.witness:
        out["witness"] = [
            {"tuple": list(t), "mass": mass} for t, mass in sorted(res.witness.items())
        ]
    _emit(out)
    return 0


# ---------------------------------------------------------------------------
# Parser and entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we use 1
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="doeblin", description=__doc__)
    parser.add_argument("--expansion-cap", type=int, default=None, help="override the coupling expansion cap")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("coef", parser_class=_Parser, help="coefficient report for one channel")
    p.add_argument("channel")
    p.set_defaults(func=_cmd_coef)

    p = sub.add_parser("couple", parser_class=_Parser, help="build an extremal coupling")
    p.add_argument("--kind", required=True, choices=["max", "min", "min3", "joint"])
    p.add_argument("--expand", action="store_true", help="include the expanded table")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=_cmd_couple)

    p = sub.add_parser("degroot", parser_class=_Parser, help="DeGroot distances and Bayes risks")
    p.add_argument("--prior", required=True, help="inline JSON array")
    p.add_argument("--loss", choices=["id", "complement"], default=None)
    p.add_argument("channel")
    p.set_defaults(func=_cmd_degroot)

    p = sub.add_parser("bayesnet", parser_class=_Parser, help="contraction bounds over a network")
    p.add_argument("net")
    p.add_argument("--target", required=True, help="comma-separated node names")
    p.add_argument("--bound", choices=["recursion", "perc", "sfpaths", "all"], default="all")
    p.add_argument("--mc", nargs=2, type=int, metavar=("SAMPLES", "SEED"), default=None)
    p.set_defaults(func=_cmd_bayesnet)

    p = sub.add_parser("fuse", parser_class=_Parser, help="min-rule fusion of PMFs")
    p.add_argument("pmfs", nargs="+")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("verify", parser_class=_Parser, help="LP-oracle check of an extremal value")
    p.add_argument("--problem", required=True, choices=["diag", "union", "estimator"])
    p.add_argument("--sense", choices=["min", "max"], default=None)
    p.add_argument("--witness", action="store_true")
    p.add_argument("--exact", action="store_true", help="exact rational pivoting")
    p.add_argument("inputs", nargs="+")
    p.set_defaults(func=_cmd_verify)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InfeasibilityError as exc:
        _note(f"infeasible: {exc}")
        return 2
    except ValidationError as exc:
        _note(f"invalid input: {exc}")
        return 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
