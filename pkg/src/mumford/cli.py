"""Command-line front end.

Every subcommand reads one JSON document (inline argument, file path,
or '-' for stdin), prints one JSON document on stdout, and exits with

    0   success,
    1   the domain answer is negative (not split, not a covering,
        mirrors meet); the payload carries the witness,
    2   malformed input or a precision/arithmetic failure, reported as
        {"error": {"type", "message", ...}}.

Outputs are deterministic: no timestamps, no environment leakage, keys
in fixed order.  Reports embed the field parameters they were computed
over.  The only exception to the one-document rule is `genus`, which
prints a bare integer.
"""

import argparse
import json
import os
import sys
from fractions import Fraction
from math import inf

from .bt_tree import (distance, hull_tree, is_infty, mirror_scan_report,
                      scan_dot)
from .covering import (build_thresholds, classify_reduction,
                       enumerate_pieces, verify_cover)
from .criterion import BranchData, genus, is_mumford
from .errors import (CriterionViolated, MirrorsIntersect, MumfordError,
                     NotCovering, SchemaError)
from .serialize import (GRAMMAR_VERSION, branch_data_from_json, end_from_json,
                        generator_from_json, laurent_to_json, params_from_json,
                        theta_config_from_json, valu_scalar, vertex_from_json)
from .theta import expand_at, recovery_report
from .valfield import LaurentElem, Valu

# exceptions that answer the command's question with "no" (exit 1)
# rather than reporting a failure to compute (exit 2)
_NEGATIVE_VERDICTS = (CriterionViolated, NotCovering, MirrorsIntersect)


def _read_document(arg: str):
    if arg == "-":
        text = sys.stdin.read()
    elif arg.lstrip().startswith(("{", "[")):
        text = arg
    elif os.path.exists(arg):
        with open(arg) as fh:
            text = fh.read()
    else:
        raise SchemaError(f"input is neither JSON nor an existing file: {arg!r}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from None


def _merge_param_flags(obj, args):
    if not isinstance(obj, dict):
        raise SchemaError("input must be a JSON object")
    out = dict(obj)
    for name in ("p", "f", "e"):
        val = getattr(args, name, None)
        if val is not None:
            out[name] = val
    return out


def _encode(x):
    """Best-effort JSON encoding of report leaves."""
    if x is None or isinstance(x, (bool, int, str)):
        return x
    if isinstance(x, Valu):
        return valu_scalar(x)
    if isinstance(x, LaurentElem):
        return laurent_to_json(x)
    if is_infty(x):
        return "inf"
    if isinstance(x, dict):
        return {str(k): _encode(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_encode(v) for v in x]
    return str(x)


def _emit(payload) -> None:
    print(json.dumps(payload, indent=2))


def _level(x):
    """Ray endpoints: integer levels in pi-units, or a signed 'inf'."""
    if x == inf:
        return "inf"
    if x == -inf:
        return "-inf"
    return int(x)


def _verdict_payload(params, verdict):
    return {
        "params": params.to_json(),
        "is_mumford": verdict.is_mumford,
        "witness": list(verdict.witness) if verdict.witness else None,
        "margins": [[None if m is None else valu_scalar(m) for m in row]
                    for row in verdict.margins],
    }


# ---- subcommands ----

def _cmd_check(args) -> int:
    bd = branch_data_from_json(_merge_param_flags(_read_document(args.input), args))
    verdict = is_mumford(bd)
    _emit(_verdict_payload(bd.params, verdict))
    return 0 if verdict.is_mumford else 1


def _cmd_genus(args) -> int:
    print(genus(args.p, args.r))
    return 0


def _cover_stages(bd):
    verdict = is_mumford(bd)
    if not verdict.is_mumford:
        return None, None, None, verdict
    table, _eprime = build_thresholds(bd)
    pieces = enumerate_pieces(table, bd)
    ok, cert = verify_cover(pieces, bd)
    return table, pieces, (ok, cert), verdict


def _cmd_cover(args) -> int:
    bd = branch_data_from_json(_merge_param_flags(_read_document(args.input), args))
    table, pieces, cover, verdict = _cover_stages(bd)
    if table is None:
        _emit(_verdict_payload(bd.params, verdict))
        return 1
    ok, cert = cover
    _emit({
        "params": bd.params.to_json(),
        "genus": genus(bd.params.p, bd.r),
        "thresholds": table.to_json(),
        "pieces": [pc.to_json() for pc in pieces],
        "covering": cert,
    })
    return 0 if ok else 1


def _cmd_reduce(args) -> int:
    bd = branch_data_from_json(_merge_param_flags(_read_document(args.input), args))
    table, pieces, cover, verdict = _cover_stages(bd)
    if table is None:
        _emit(_verdict_payload(bd.params, verdict))
        return 1
    ok, cert = cover
    reductions = [classify_reduction(pc, bd) for pc in pieces]
    _emit({
        "params": bd.params.to_json(),
        "covering": cert,
        "reductions": [rep.to_json() for rep in reductions],
    })
    return 0 if ok and all(rep.passes_condition for rep in reductions) else 1


def _theta_payload(cfg, defaulted, radius):
    rep = recovery_report(cfg)
    payload = {
        "params": cfg.params.to_json(),
        "u": laurent_to_json(cfg.u),
        "u_defaulted": defaulted,
        "cutoff": rep["cutoff"],
        "prec": rep["prec"],
        "grammar": GRAMMAR_VERSION,
        "alpha1": laurent_to_json(rep["alpha1"]),
        "alpha2": laurent_to_json(rep["alpha2"]),
        "lambda1": laurent_to_json(rep["lambda1"]),
        "lambda2": laurent_to_json(rep["lambda2"]),
        "bounds": [valu_scalar(b) for b in rep["bounds"]],
        "margins": {k: None if v is None else valu_scalar(v)
                    for k, v in rep["margins"].items()},
    }
    if radius is not None:
        # certify both polar expansions on the requested closed ball
        exp = Valu(radius)
        certified = {}
        for i in (1, 2):
            series = expand_at(cfg, i, cfg.group.p, radius_exp=exp)
            certified[str(i)] = {
                "radius_exp": valu_scalar(series.radius_exp),
                "order": series.order,
                "words": series.word_count,
            }
        payload["radius"] = certified
    return payload, rep


def _cmd_theta(args) -> int:
    cfg, defaulted = theta_config_from_json(
        _merge_param_flags(_read_document(args.input), args),
        L=args.words, prec=args.prec)
    payload, _rep = _theta_payload(cfg, defaulted, args.radius)
    _emit(payload)
    return 0


def _cmd_roundtrip(args) -> int:
    cfg, defaulted = theta_config_from_json(
        _merge_param_flags(_read_document(args.input), args),
        L=args.words, prec=args.prec)
    payload, rep = _theta_payload(cfg, defaulted, args.radius)
    params = cfg.params
    lam1, lam2 = rep["lambda1"], rep["lambda2"]
    bd = BranchData(params, [LaurentElem.zero(params), cfg.p2], [lam1, lam2])
    gap = (lam1.valuation() + lam2.valuation()
           - (bd.a[0] - bd.a[1]).valuation() * 2)
    out = {"theta": payload,
           "branch_data": {"a": [laurent_to_json(a) for a in bd.a],
                           "lambda": [laurent_to_json(x) for x in bd.lam]},
           "criterion": {"margin": valu_scalar(gap)}}
    good = gap > Valu(0)
    if genus(params.p, bd.r) >= 2:
        verdict = is_mumford(bd)
        out["criterion"]["is_mumford"] = verdict.is_mumford
        good = verdict.is_mumford
    else:
        # two branch points over p = 2: genus 1, outside the verdict
        # machinery, but the gap and the covering still make sense
        out["criterion"]["is_mumford"] = None
    if good:
        table, _eprime = build_thresholds(bd)
        pieces = enumerate_pieces(table, bd)
        ok, cert = verify_cover(pieces, bd)
        reductions = [classify_reduction(pc, bd) for pc in pieces]
        out["covering"] = cert
        out["reductions_pass"] = all(rep_.passes_condition for rep_ in reductions)
        out["piece_count"] = len(pieces)
        good = ok and out["reductions_pass"]
    _emit(out)
    return 0 if good else 1


def _cmd_tree(args) -> int:
    doc = _merge_param_flags(_read_document(args.input), args)
    params = params_from_json(doc)
    if args.mode == "dist":
        if "v" not in doc or "w" not in doc:
            raise SchemaError("tree dist needs vertices 'v' and 'w'")
        v = vertex_from_json(params, doc["v"])
        w = vertex_from_json(params, doc["w"])
        _emit({"params": params.to_json(), "v": v.label(), "w": w.label(),
               "distance": distance(v, w)})
        return 0
    if args.mode == "mirror":
        gens = doc.get("gens")
        if not (isinstance(gens, list) and len(gens) == 2):
            raise SchemaError("tree mirror needs exactly two generators")
        g1, g2 = (generator_from_json(params, g).matrix for g in gens)
        report = mirror_scan_report(g1, g2)
        if args.format == "dot":
            print(scan_dot(report))
            return 0
        _emit({
            "params": params.to_json(),
            "distance": report["distance"],
            "xi1": report["xi1"].label(),
            "xi2": report["xi2"].label(),
            "rows": [{"s": row["s"], "vertex": row["vertex"].label(),
                      "fixed1": row["fixed1"], "fixed2": row["fixed2"]}
                     for row in report["rows"]],
        })
        return 0
    # hull
    pts_spec = doc.get("points")
    if not (isinstance(pts_spec, list) and len(pts_spec) >= 2):
        raise SchemaError("tree hull needs a list of at least two points")
    pts = [end_from_json(params, s) for s in pts_spec]
    hull = hull_tree(pts)
    if args.format == "dot":
        print(hull.to_dot())
        return 0
    _emit({
        "params": params.to_json(),
        "nodes": [{"label": v.label(), "level": v.level} for v in hull.nodes],
        "edges": [list(edge) for edge in hull.edges],
        "attach": list(hull.attach),
        "rays": [[_level(lo), _level(hi)]
                 for (lo, hi) in (hull.ray_levels(k) for k in range(len(pts)))],
    })
    return 0


# ---- wiring ----

def _add_input(sp):
    sp.add_argument("input", help="inline JSON, a file path, or '-' for stdin")


def _add_param_flags(sp):
    sp.add_argument("--p", type=int, help="residue characteristic (overrides input)")
    sp.add_argument("--f", type=int, help="residue degree (overrides input)")
    sp.add_argument("--e", type=int, help="ramification index (overrides input)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mumford",
        description="split-degeneration tests, affinoid coverings, and "
                    "halo-coordinate recovery for wild cyclic covers of the "
                    "projective line over a local field")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("check", help="pairwise gap criterion on branch data")
    _add_input(sp)
    _add_param_flags(sp)
    sp.set_defaults(fn=_cmd_check)

    sp = sub.add_parser("genus", help="genus of the degree-p cover with r poles")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--r", type=int, required=True)
    sp.set_defaults(fn=_cmd_genus)

    sp = sub.add_parser("cover", help="thresholds, pieces, and the covering "
                                      "certificate")
    _add_input(sp)
    _add_param_flags(sp)
    sp.set_defaults(fn=_cmd_cover)

    sp = sub.add_parser("reduce", help="canonical reduction of every piece")
    _add_input(sp)
    _add_param_flags(sp)
    sp.set_defaults(fn=_cmd_reduce)

    for name, fn in (("theta", _cmd_theta), ("roundtrip", _cmd_roundtrip)):
        sp = sub.add_parser(
            name,
            help="polar parts from orbit products" if name == "theta"
            else "recover residues, then re-run criterion and covering")
        _add_input(sp)
        _add_param_flags(sp)
        sp.add_argument("--words", type=int, default=None, metavar="L",
                        help="orbit cutoff (syllable length)")
        sp.add_argument("--prec", type=int, default=None,
                        help="working precision in pi-digits")
        sp.add_argument("--radius", type=str, default=None, metavar="R",
                        help="certify the polar expansions on the closed ball "
                             "of t-valuation exponent R (rational, e.g. 3/2)")
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("tree", help="lattice-tree computations")
    sp.add_argument("mode", choices=("dist", "mirror", "hull"))
    _add_input(sp)
    _add_param_flags(sp)
    sp.add_argument("--format", choices=("json", "dot"), default="json")
    sp.set_defaults(fn=_cmd_tree)

    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "radius", None) is not None:
        try:
            args.radius = Fraction(args.radius)
        except (ValueError, ZeroDivisionError):
            _emit({"error": {"type": "SchemaError",
                             "message": f"--radius must be rational: {args.radius!r}"}})
            return 2
    if getattr(args, "format", "json") == "dot" and not (
            args.command == "tree" and args.mode in ("mirror", "hull")):
        _emit({"error": {"type": "SchemaError",
                         "message": "dot output exists only for tree mirror "
                                    "and tree hull"}})
        return 2
    try:
        return args.fn(args)
    except _NEGATIVE_VERDICTS as exc:
        _emit({"error": {"type": type(exc).__name__, "message": str(exc),
                         "witness": _encode(getattr(exc, "witness", None)
                                            or getattr(exc, "pair", None))}})
        return 1
    except MumfordError as exc:
        payload = {"type": type(exc).__name__, "message": str(exc)}
        witness = getattr(exc, "witness", None)
        if witness is not None:
            payload["witness"] = _encode(witness)
        _emit({"error": payload})
        return 2


if __name__ == "__main__":
    sys.exit(main())
