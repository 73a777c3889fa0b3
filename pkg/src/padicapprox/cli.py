"""Command-line entry point: deterministic experiments with JSON/CSV output.

Every exact rational is printed in lowest terms as "num/den" (or a bare
integer); the only floats in any output are box-dimension slopes, fixed to six
decimals. Hypothesis violations exit with status 2 and a structured report
naming the failed inequality.
"""

from __future__ import annotations

import argparse
import csv
import json
import random
import re
import sys
from fractions import Fraction

from . import approx, dimension, manifold, minkowski
from .clopen import ClopenSet
from .core import HypothesisError, PAdicInt, Params, embed_rational

SCHEMA_VERSION = "1"


def fmt(value):
    """Render exact values for JSON: Fractions as strings, containers recursively."""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, dict):
        return {k: fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [fmt(v) for v in value]
    return value


def emit(payload: dict) -> None:
    payload = {"schema_version": SCHEMA_VERSION, **payload}
    json.dump(fmt(payload), sys.stdout, sort_keys=True)
    sys.stdout.write("\n")


def parse_fraction(text: str) -> Fraction:
    return Fraction(text)


_PSI_PATTERNS = [
    (re.compile(r"^q\^(-?[\d/]+)$"), lambda m: approx.PowerLaw(-Fraction(m.group(1)))),
    (
        re.compile(r"^([\d/]+)\*q\^(-?[\d/]+)$"),
        lambda m: approx.ScaledPower(Fraction(m.group(1)), -Fraction(m.group(2))),
    ),
    (
        re.compile(r"^1/\(([\d/]*)q\)$"),
        lambda m: approx.ScaledPower(Fraction(1) / Fraction(m.group(1) or 1), Fraction(1)),
    ),
    (
        re.compile(r"^([\d/]+)/q$"),
        lambda m: approx.ScaledPower(Fraction(m.group(1)), Fraction(1)),
    ),
]


def parse_psi(text: str) -> approx.PsiComponent:
    """Tiny grammar: 'q^-5/2', '3*q^-2', '1/(2q)', '3/q', or 'table:2=1/4,3=1/9'."""
    text = text.strip().replace(" ", "")
    if text.startswith("table:"):
        entries = []
        for part in text[len("table:") :].split(","):
            q, v = part.split("=")
            entries.append((int(q), Fraction(v)))
        return approx.TableFunction(tuple(entries))
    for pattern, build in _PSI_PATTERNS:
        m = pattern.match(text)
        if m:
            return build(m)
    raise ValueError(f"cannot parse approximation function {text!r}")


def psi_tuple_from_args(args, n: int) -> approx.ApproxTuple:
    specs = args.psi
    if len(specs) == 1:
        specs = specs * n
    if len(specs) != n:
        raise ValueError(f"need 1 or {n} --psi specifications, got {len(specs)}")
    return approx.ApproxTuple(tuple(parse_psi(s) for s in specs))


def load_map(args) -> manifold.PolyMap:
    if getattr(args, "map_json", None):
        return manifold.PolyMap.from_json_dict(json.loads(args.map_json))
    with open(args.map) as fh:
        return manifold.PolyMap.from_json_dict(json.load(fh))


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_measure_layer(args) -> None:
    params = Params(args.p, args.n)
    psi = psi_tuple_from_args(args, args.n)
    mu = approx.layer_measure(params, psi, args.a0, args.reduced)
    ref = approx.reference_measure(params, psi, args.a0)
    emit(
        {
            "a0": args.a0,
            "reduced": args.reduced,
            "measure": mu,
            "reference": ref,
            "equal": mu == ref,
            "step_exponents": list(psi.step_exponents(args.a0, args.p)),
            "proper_at_a0": psi.proper_at(args.a0),
        }
    )


def cmd_claims_check(args) -> None:
    params = Params(args.p, args.n)
    psi = psi_tuple_from_args(args, args.n)
    rep = approx.measure_claims_check(params, psi, args.a0, args.b0)
    emit(
        {
            "a0": rep.a0,
            "b0": rep.b0,
            "measure_a": rep.measure_a,
            "reference_a": rep.reference_a,
            "equal_a": rep.equal_a,
            "measure_b": rep.measure_b,
            "reference_b": rep.reference_b,
            "equal_b": rep.equal_b,
            "intersection_measure": rep.intersection_measure,
            "ratio_denominator": rep.ratio_denominator,
            "ratio": rep.ratio,
        }
    )


def cmd_khintchine(args) -> None:
    params = Params(args.p, args.n)
    psi = psi_tuple_from_args(args, args.n)
    emit({"terms": args.terms, "partial_sum": approx.khintchine_sum(params, psi, args.terms)})


def cmd_duffin_schaeffer(args) -> None:
    params = Params(args.p, args.n)
    psi = psi_tuple_from_args(args, args.n)
    total, ratio = approx.duffin_schaeffer_sum(params, psi, args.terms)
    emit({"terms": args.terms, "partial_sum": total, "ratio_to_khintchine": ratio})


def cmd_partial_limsup(args) -> None:
    params = Params(args.p, args.n)
    psi = psi_tuple_from_args(args, args.n)
    depth = args.depth or approx.required_depth(params, psi, args.start, args.end)
    if args.csv:
        with open(args.csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(
                ["a0", "layer_measure", "reference", "union_measure",
                 "khintchine_partial", "duffin_schaeffer_partial"]
            )
            for row in approx.layer_sweep_rows(params, psi, args.start, args.end, args.reduced, depth):
                writer.writerow([fmt(row[k]) for k in
                                 ("a0", "layer_measure", "reference", "union_measure",
                                  "khintchine_partial", "duffin_schaeffer_partial")])
    S = approx.partial_limsup(params, psi, args.start, args.end, args.reduced, depth)
    if args.save_set:
        with open(args.save_set, "w") as fh:
            fh.write(S.to_text())
    out = {
        "range": [args.start, args.end],
        "reduced": args.reduced,
        "depth": depth,
        "measure": S.measure(),
    }
    if args.boxes:
        out["box_counts"] = {str(k): S.box_count(k) for k in args.boxes}
    emit(out)


def cmd_minkowski(args) -> None:
    if args.random:
        _random_minkowski_sweep(args)
        return
    p = args.p
    n = len(args.form)
    rows = []
    for spec in args.form:
        entries = [Fraction(v) for v in spec.split(",")]
        if len(entries) != n + 1:
            raise ValueError(f"each form needs {n + 1} coefficients")
        rows.append(tuple(embed_rational(c.numerator, c.denominator, p=p, precision=args.precision)
                          for c in entries))
    sys_ = minkowski.LinearFormSystem(
        p, n, tuple(rows), tuple(args.height),
        tuple(Fraction(t) for t in args.tau), tuple(Fraction(s) for s in args.sigma),
    )
    sol = minkowski.solve(sys_)
    emit(
        {
            "solution": list(sol.x),
            "bucket_exponents": list(sol.bucket_exponents),
            "verified": sol.verified,
            "boundary": sol.boundary,
            "method": sol.method,
        }
    )


def _random_minkowski_sweep(args) -> None:
    rng = random.Random(args.seed)
    solved = verified = surplus_ok = 0
    for _ in range(args.random):
        p = rng.choice([2, 3, 5])
        n = rng.randrange(1, 4)
        heights = tuple(rng.randrange(2, 13) for _ in range(n + 1))
        while True:
            tau = _random_split(rng, n, Fraction(n + 1))
            sigma = _random_signed_split(rng, n, Fraction(n))
            sys_ = minkowski.LinearFormSystem(
                p, n,
                tuple(tuple(PAdicInt(p, 14, rng.randrange(p**14)) for _ in range(n + 1)) for _ in range(n)),
                heights, tau, sigma,
            )
            try:
                minkowski.bucket_exponents(sys_)
                break
            except minkowski.BelowThresholdError:
                continue
        sol = minkowski.solve(sys_)
        solved += 1
        verified += sol.verified
        if minkowski.pigeonhole_surplus(sys_):
            surplus_ok += sol.method == "bucket"
    emit({"systems": solved, "verified": verified, "surplus_bucket_successes": surplus_ok, "seed": args.seed})


def _random_split(rng, n, total):
    while True:
        parts = [Fraction(rng.randrange(1, 4 * (n + 1)), 4) for _ in range(n - 1)]
        parts.append(total - sum(parts, Fraction(0)))
        if all(x > 0 for x in parts):
            return tuple(parts)


def _random_signed_split(rng, n, total):
    parts = [Fraction(rng.randrange(-4, 5), 2) for _ in range(n - 1)]
    parts.append(total - sum(parts, Fraction(0)))
    return tuple(parts)


def cmd_dirichlet_solve(args) -> None:
    f = load_map(args)
    x = tuple(
        PAdicInt(f.p, args.precision, int(r)) for r in args.x.split(",")
    )
    inst = manifold.DirichletInstance(
        f, x, tuple(Fraction(t) for t in args.tau), tuple(Fraction(v) for v in args.v), args.H
    )
    rep = manifold.dirichlet_h0(inst)
    sol = manifold.dirichlet_solve(inst)
    emit(
        {
            "H": args.H,
            "h0": rep.h0,
            "h0_cases": rep.cases,
            "point": list(sol.point.a),
            "k": sol.k,
            "verified": sol.verified,
            "method": sol.method,
        }
    )


def cmd_enumerate_s_tau(args) -> None:
    f = load_map(args)
    pts = manifold.enumerate_S_tau(
        f, [Fraction(t) for t in args.tau], args.hmax, h_min=args.hmin, workers=args.workers
    )
    blocks: dict[str, int] = {}
    h = 1
    while h <= args.hmax:
        hi = min(2 * h - 1, args.hmax)
        blocks[f"[{h},{hi}]"] = sum(1 for pt in pts if h <= pt.height <= hi)
        h *= 2
    emit({"count": len(pts), "dyadic_counts": blocks, "points": [list(pt.a) for pt in pts[: args.limit]]})


def cmd_cover_preimage(args) -> None:
    f = load_map(args)
    cover = manifold.cover_preimage(
        f,
        [Fraction(t) for t in args.tau],
        Fraction(args.delta),
        args.hmax,
        depth=args.depth,
        h_min=args.hmin,
    )
    out = {"measure": cover.measure(), "depth": args.depth, "hmax": args.hmax, "hmin": args.hmin}
    if args.boxes:
        out["box_counts"] = {str(k): cover.box_count(k) for k in args.boxes}
    if args.save_set:
        with open(args.save_set, "w") as fh:
            fh.write(cover.to_text())
    emit(out)


def cmd_dim(args) -> None:
    which = args.formula
    if which == "jb":
        tau = [Fraction(t) for t in args.tau]
        value = dimension.jb_dimension(tau)
        n = len(tau)
        report = {"tau_i > 1": True, f"sum(tau_i) > {n + 1}": True}
        emit({"formula": "jb", "tau": tau, "value": value, "hypothesis_report": report})
    elif which == "rynne":
        tau = [Fraction(t) for t in args.tau]
        value = dimension.rynne_dimension(tau)
        report = {"sum(tau_i) >= 1": True, "sorted": tau == sorted(tau, reverse=True)}
        emit({"formula": "rynne", "tau": tau, "value": value, "hypothesis_report": report})
    elif which == "ww":
        res = dimension.ww_exponent(
            [Fraction(a) for a in args.a], [Fraction(t) for t in args.t], args.variant
        )
        emit(
            {
                "formula": "ww",
                "variant": args.variant,
                "value": res.value,
                "argmin": res.argmin,
                "partition": {
                    "K1": list(res.partition[0]),
                    "K2": list(res.partition[1]),
                    "K3": list(res.partition[2]),
                },
                "hypothesis_report": {"a_i > 0 and t_i >= 0": True},
            }
        )
    else:
        value = dimension.manifold_lower_bound(
            [Fraction(t) for t in args.tau], args.d, args.m, args.which
        )
        emit(
            {
                "formula": "manifold",
                "which": args.which,
                "value": value,
                "hypothesis_report": {"checked": True},
            }
        )


def cmd_boxdim(args) -> None:
    if args.set:
        with open(args.set) as fh:
            S = ClopenSet.from_text(fh.read())
        levels = args.levels or list(range(0, S.depth + 1))
        counts = [(k, S.box_count(k)) for k in levels]
    else:
        counts = []
        for part in args.counts.split(","):
            k, N = part.split(":")
            counts.append((int(k), int(N)))
    fit = dimension.boxdim_estimate(counts, args.p, drop_coarsest=args.drop_coarsest)
    emit(
        {
            "slope": f"{fit.slope:.6f}",
            "intercept": f"{fit.intercept:.6f}",
            "r_squared": f"{fit.r_squared:.6f}",
            "levels": list(fit.levels),
            "counts": [[k, n] for k, n in counts],
        }
    )


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="padicapprox",
        description="Exact experiments in simultaneous p-adic Diophantine approximation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common_psi(sp):
        sp.add_argument("--p", type=int, required=True)
        sp.add_argument("--n", type=int, default=1)
        sp.add_argument("--psi", action="append", required=True,
                        help="e.g. 'q^-2', '1/(2q)', '3*q^-5/2', 'table:2=1/4,3=1/9'")

    sp = sub.add_parser("measure-layer", help="exact measure of one approximation layer")
    common_psi(sp)
    sp.add_argument("--a0", type=int, required=True)
    sp.add_argument("--reduced", action="store_true")
    sp.set_defaults(func=cmd_measure_layer)

    sp = sub.add_parser("claims-check", help="layer identity and intersection ratio")
    common_psi(sp)
    sp.add_argument("--a0", type=int, required=True)
    sp.add_argument("--b0", type=int, required=True)
    sp.set_defaults(func=cmd_claims_check)

    sp = sub.add_parser("khintchine", help="partial volume series")
    common_psi(sp)
    sp.add_argument("--terms", type=int, required=True)
    sp.set_defaults(func=cmd_khintchine)

    sp = sub.add_parser("duffin-schaeffer", help="totient-weighted partial series and ratio")
    common_psi(sp)
    sp.add_argument("--terms", type=int, required=True)
    sp.set_defaults(func=cmd_duffin_schaeffer)

    sp = sub.add_parser("partial-limsup", help="union of layers over a denominator range")
    common_psi(sp)
    sp.add_argument("--from", dest="start", type=int, required=True)
    sp.add_argument("--to", dest="end", type=int, required=True)
    sp.add_argument("--reduced", action="store_true")
    sp.add_argument("--depth", type=int, default=None)
    sp.add_argument("--csv", default=None, help="write the per-a0 sweep table here")
    sp.add_argument("--save-set", default=None, help="serialize the resulting set here")
    sp.add_argument("--boxes", type=int, nargs="*", default=None)
    sp.set_defaults(func=cmd_partial_limsup)

    sp = sub.add_parser("minkowski", help="pigeonhole solver for linear-form systems")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--precision", type=int, default=20)
    sp.add_argument("--form", action="append", default=[],
                    help="comma-separated rational coefficients, one flag per form")
    sp.add_argument("--height", type=int, nargs="*", default=[])
    sp.add_argument("--tau", nargs="*", default=[])
    sp.add_argument("--sigma", nargs="*", default=[])
    sp.add_argument("--random", type=int, default=0, help="run a seeded random-system sweep instead")
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_minkowski)

    def common_map(sp):
        sp.add_argument("--map", default=None, help="path to a polynomial-map JSON fixture")
        sp.add_argument("--map-json", default=None, help="inline JSON for the map")

    sp = sub.add_parser("dirichlet-solve", help="constructive approximation on a map graph")
    common_map(sp)
    sp.add_argument("--x", required=True, help="comma-separated residues of the base point")
    sp.add_argument("--precision", type=int, default=60)
    sp.add_argument("--tau", nargs="+", required=True)
    sp.add_argument("--v", nargs="+", required=True)
    sp.add_argument("--H", type=int, required=True)
    sp.set_defaults(func=cmd_dirichlet_solve)

    sp = sub.add_parser("enumerate-s-tau", help="resonant integer points near the graph")
    common_map(sp)
    sp.add_argument("--tau", nargs="+", required=True, help="dependent-block exponents")
    sp.add_argument("--hmax", type=int, required=True)
    sp.add_argument("--hmin", type=int, default=1)
    sp.add_argument("--limit", type=int, default=50, help="max points echoed in JSON")
    sp.add_argument("--workers", type=int, default=1,
                    help="shard the denominator range across threads; output is identical")
    sp.set_defaults(func=cmd_enumerate_s_tau)

    sp = sub.add_parser("cover-preimage", help="rectangle cover of the approximable preimage")
    common_map(sp)
    sp.add_argument("--tau", nargs="+", required=True, help="all n exponents")
    sp.add_argument("--delta", default="1")
    sp.add_argument("--hmax", type=int, required=True)
    sp.add_argument("--hmin", type=int, default=1)
    sp.add_argument("--depth", type=int, required=True)
    sp.add_argument("--boxes", type=int, nargs="*", default=None)
    sp.add_argument("--save-set", default=None)
    sp.set_defaults(func=cmd_cover_preimage)

    sp = sub.add_parser("dim", help="dimension formula evaluators")
    dim_sub = sp.add_subparsers(dest="formula", required=True)
    d = dim_sub.add_parser("jb")
    d.add_argument("--tau", nargs="+", required=True)
    d.set_defaults(func=cmd_dim)
    d = dim_sub.add_parser("rynne")
    d.add_argument("--tau", nargs="+", required=True)
    d.set_defaults(func=cmd_dim)
    d = dim_sub.add_parser("ww")
    d.add_argument("--a", nargs="+", required=True)
    d.add_argument("--t", nargs="+", required=True)
    d.add_argument("--variant", choices=["K2-sum", "K3-sum"], default="K2-sum")
    d.set_defaults(func=cmd_dim)
    d = dim_sub.add_parser("manifold")
    d.add_argument("--tau", nargs="+", required=True)
    d.add_argument("--d", type=int, required=True)
    d.add_argument("--m", type=int, required=True)
    d.add_argument("--which", choices=["thm2.7", "thm2.8", "thm2.9"], required=True)
    d.set_defaults(func=cmd_dim)

    sp = sub.add_parser("boxdim", help="least-squares box-dimension estimate")
    sp.add_argument("--p", type=int, required=True)
    sp.add_argument("--counts", default=None, help="'k:N,k:N,...'")
    sp.add_argument("--set", default=None, help="serialized clopen set file")
    sp.add_argument("--levels", type=int, nargs="*", default=None)
    sp.add_argument("--drop-coarsest", type=int, default=2)
    sp.set_defaults(func=cmd_boxdim)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args.func(args)
    except HypothesisError as exc:
        emit({"error": {"kind": "hypothesis", "failed": exc.failed, "message": str(exc)}})
        return 2
    except (ValueError, OSError) as exc:
        emit({"error": {"kind": "invalid-input", "message": str(exc)}})
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
