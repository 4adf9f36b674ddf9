"""Command-line front end.

Loads a construction from a JSON spec file, runs one certificate or query,
and emits a deterministic report: same spec file, same arguments, same
bytes.  JSON is the primary format; ``--format csv`` emits just the row
table and ``--format text`` a human summary.

Exit codes: 0 when a result or verdict was computed (including refuting
verdicts), 2 for spec-file or schema problems, 3 when a resource budget
was exceeded, 4 when a certificate's precondition failed, 1 for anything
unexpected.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import traceback
import warnings
from fractions import Fraction

from rankone import analysis, gallery, oracle, tower
from rankone.core import (
    Budget,
    BudgetExceeded,
    PreconditionError,
    RankOneError,
    RankOneSpec,
    descendant_set,
    explicit_spec,
)

_JSON_INT_LIMIT = 1 << 53


class SpecFileError(RankOneError):
    """The spec file is missing, malformed, or violates the schema."""


# -- spec files ----------------------------------------------------------------

_TOP_KEYS = {"name", "builder", "max_stage", "budget"}
_BUDGET_KEYS = {"max_descendants", "max_pairs", "max_height_bits"}

_BUILDER_KEYS = {
    "staircase": {"kind", "r_seq", "extend"},
    "high_staircase": {"kind", "r_seq", "z_seq", "extend"},
    "main_wde": {"kind", "max_r"},
    "rigid_wde": {"kind", "max_r"},
    "t_q": {"kind", "q", "max_r"},
    "koopman": {"kind", "max_r"},
    "partition_staircase": {"kind", "k", "r_seq", "extend"},
    "not_eic": {"kind", "q"},
    "explicit": {"kind", "stages", "cycle"},
}


def _require_keys(mapping: dict, allowed: set, where: str) -> None:
    unknown = set(mapping) - allowed
    if unknown:
        raise SpecFileError(f"unknown {where} fields: {sorted(unknown)}")


def _caps_from(params: dict) -> gallery.Caps:
    if "max_r" not in params:
        return gallery.Caps()
    return gallery.Caps(max_r=params["max_r"])


def load_spec(path: str, args: argparse.Namespace) -> RankOneSpec:
    """Build a RankOneSpec from a JSON file plus CLI budget overrides."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except OSError as e:
        raise SpecFileError(f"cannot read spec file {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise SpecFileError(f"spec file {path} is not valid JSON: {e}") from e
    if not isinstance(data, dict):
        raise SpecFileError("spec file must contain a JSON object")
    _require_keys(data, _TOP_KEYS, "spec")
    if "builder" not in data or not isinstance(data["builder"], dict):
        raise SpecFileError('spec file needs a "builder" object')
    builder = data["builder"]
    kind = builder.get("kind")
    if kind not in _BUILDER_KEYS:
        raise SpecFileError(
            f"unknown builder kind {kind!r}; expected one of {sorted(_BUILDER_KEYS)}"
        )
    _require_keys(builder, _BUILDER_KEYS[kind], f"builder[{kind}]")

    budget_fields = dict(data.get("budget", {}))
    if not isinstance(budget_fields, dict):
        raise SpecFileError('"budget" must be an object')
    _require_keys(budget_fields, _BUDGET_KEYS, "budget")
    if "max_stage" in data:
        budget_fields["max_stage"] = data["max_stage"]
    for flag in ("max_stage", "max_descendants", "max_pairs", "max_height_bits"):
        v = getattr(args, flag, None)
        if v is not None:
            budget_fields[flag] = v
    try:
        budget = Budget(**budget_fields)
    except TypeError as e:
        raise SpecFileError(f"bad budget: {e}") from e

    name = data.get("name", kind)
    try:
        return _build(kind, builder, name, budget)
    except (ValueError, TypeError) as e:
        raise SpecFileError(f"bad builder parameters: {e}") from e


def _build(kind: str, b: dict, name: str, budget: Budget) -> RankOneSpec:
    if kind == "staircase":
        return gallery.staircase(
            b.get("r_seq", (2,)),
            extend=b.get("extend", "increment"),
            name=name,
            budget=budget,
        )
    if kind == "high_staircase":
        return gallery.high_staircase(
            b["r_seq"],
            b["z_seq"],
            extend=b.get("extend", "repeat"),
            name=name,
            budget=budget,
        )
    if kind == "main_wde":
        return gallery.main_wde(_caps_from(b), name=name, budget=budget)
    if kind == "rigid_wde":
        return gallery.rigid_wde(_caps_from(b), name=name, budget=budget)
    if kind == "t_q":
        return gallery.t_q(b["q"], _caps_from(b), name=name, budget=budget)
    if kind == "koopman":
        return gallery.koopman(_caps_from(b), name=name, budget=budget)
    if kind == "partition_staircase":
        return gallery.partition_staircase(
            b["k"],
            b.get("r_seq", (2,)),
            extend=b.get("extend", "increment"),
            name=name,
            budget=budget,
        )
    if kind == "not_eic":
        return gallery.not_eic(b["q"], name=name, budget=budget)
    if kind == "explicit":
        stages = [(s[0], tuple(s[1])) for s in b["stages"]]
        return explicit_spec(
            stages, name=name, budget=budget, cycle=bool(b.get("cycle", False))
        )
    raise SpecFileError(f"unhandled builder kind {kind!r}")


# -- serialization ---------------------------------------------------------------


def _jsonable(v):
    """Exact, deterministic JSON image: rationals as 'p/q' strings, integers
    beyond the 53-bit float-safe range as decimal strings."""
    if isinstance(v, bool) or v is None:
        return v
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, int):
        return v if abs(v) < _JSON_INT_LIMIT else str(v)
    if isinstance(v, float):
        return v
    if isinstance(v, str):
        return v
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "__dataclass_fields__"):
        return {f: _jsonable(getattr(v, f)) for f in v.__dataclass_fields__}
    raise TypeError(f"cannot serialize {type(v).__name__}")


def _spec_block(spec: RankOneSpec) -> dict:
    return {
        "name": spec.name,
        "fingerprint": spec.fingerprint(),
        "builder": spec.params,
        "budget": spec.budget.to_dict(),
        "declared_properties": sorted(spec.declared_properties),
        "notes": list(spec.notes),
    }


def _report_block(rep: analysis.CertificateReport) -> dict:
    return {
        "kind": rep.kind,
        "horizon": rep.horizon,
        "verdict": rep.verdict,
        "rows": list(rep.rows),
        "summary": rep.summary,
        "notes": list(rep.notes),
    }


def _emit(payload: dict, fmt: str, out) -> None:
    if fmt == "json":
        json.dump(_jsonable(payload), out, indent=2, sort_keys=True)
        out.write("\n")
        return
    rows = payload.get("report", {}).get("rows") or payload.get("rows") or []
    if fmt == "csv":
        if not rows:
            out.write("")
            return
        writer = csv.writer(out, lineterminator="\n")
        header = list(rows[0].keys())
        writer.writerow(header)
        for row in rows:
            writer.writerow([_csv_cell(row.get(k)) for k in header])
        return
    # text
    rep = payload.get("report")
    out.write(f"command: {payload['command']}\n")
    out.write(f"spec: {payload['spec']['name']} ({payload['spec']['fingerprint'][:12]})\n")
    if rep is not None:
        out.write(f"kind: {rep['kind']}\nverdict: {rep['verdict']}\n")
        for k, v in rep["summary"].items():
            out.write(f"{k}: {_csv_cell(v)}\n")
        out.write(f"rows: {len(rep['rows'])}\n")
        for note in rep["notes"]:
            out.write(f"note: {note}\n")
    else:
        for k, v in payload.get("result", {}).items():
            out.write(f"{k}: {_csv_cell(v)}\n")
    for note in payload["spec"]["notes"]:
        out.write(f"spec note: {note}\n")


def _csv_cell(v):
    if isinstance(v, Fraction):
        return str(v)
    if isinstance(v, (list, tuple)):
        return " ".join(str(x) for x in v)
    return v


# -- argument plumbing ------------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from e


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as e:
        raise argparse.ArgumentTypeError(f"expected a rational like 1/2: {text!r}") from e


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--spec", required=True, help="path to a JSON spec file")
    p.add_argument("--format", choices=("json", "csv", "text"), default="json")
    p.add_argument("--max-stage", type=int, dest="max_stage")
    p.add_argument("--max-descendants", type=int, dest="max_descendants")
    p.add_argument("--max-pairs", type=int, dest="max_pairs")
    p.add_argument("--max-height-bits", type=int, dest="max_height_bits")


def _levels(spec: RankOneSpec, stage: int, levels: list[int]) -> tower.LevelSet:
    return tower.level_set(spec, stage, levels)


# -- handlers ----------------------------------------------------------------------


def _h_describe(args, spec):
    rows = []
    for n in range(args.stages):
        st = spec.stage(n)
        rows.append(
            {
                "stage": n,
                "r": st.r,
                "h": spec.height(n),
                "height_set_size": len(spec.height_set(n)),
                "max_descendant": spec.max_descendant(n),
            }
        )
    return {"inputs": {"stages": args.stages}, "rows": rows}


def _h_heights(args, spec):
    H = spec.height_set(args.stage)
    return {
        "inputs": {"stage": args.stage},
        "result": {"h": spec.height(args.stage), "heights": list(H)},
        "rows": [{"index": i, "height": h} for i, h in enumerate(H)],
    }


def _h_descendants(args, spec):
    D = descendant_set(spec, args.i, args.j, args.b)
    return {
        "inputs": {"i": args.i, "j": args.j, "b": args.b},
        "result": {"size": len(D), "descendants": list(D)},
        "rows": [{"index": i, "height": d} for i, d in enumerate(D)],
    }


def _h_measure(args, spec):
    B = _levels(spec, args.stage, args.levels)
    if args.other_levels is not None:
        other_stage = args.other_stage if args.other_stage is not None else args.stage
        A = B
        B2 = _levels(spec, other_stage, args.other_levels)
        value = tower.intersection_measure(spec, A, B2, args.k)
        what = "shifted-intersection"
    else:
        value = tower.translate_intersection_measure(spec, B, args.k)
        what = "self-overlap"
    return {
        "inputs": {
            "stage": args.stage,
            "levels": args.levels,
            "k": args.k,
            "other_stage": args.other_stage,
            "other_levels": args.other_levels,
        },
        "result": {
            "quantity": what,
            "measure": value,
            "set_measure": tower.measure(spec, B),
        },
    }


def _h_check_cons(args, spec):
    rep = analysis.conservativity_sufficient(spec, args.k, args.horizon, args.threshold)
    return {"inputs": {"k": args.k, "horizon": args.horizon, "threshold": args.threshold}, "report": rep}


def _h_check_noncons(args, spec):
    rep = analysis.nonconservativity_check(spec, args.k, args.horizon, args.floor)
    return {"inputs": {"k": args.k, "horizon": args.horizon, "floor": args.floor}, "report": rep}


def _h_check_nonerg(args, spec):
    rep = analysis.nonergodicity_certificate(spec, args.b, args.horizon)
    return {"inputs": {"b": args.b, "horizon": args.horizon}, "report": rep}


def _h_rigidity(args, spec):
    a, ratio = analysis.rigidity_scan(spec, args.stage)
    return {
        "inputs": {"stage": args.stage},
        "result": {"best_shift": a, "ratio": ratio, "height_set_size": len(spec.height_set(args.stage))},
    }


def _h_alpha(args, spec):
    B = _levels(spec, args.stage, args.levels)
    prof = analysis.alpha_type_profile(
        spec, B, args.kmax, args.threshold, store_ratios=args.dump
    )
    payload = {
        "inputs": {
            "stage": args.stage,
            "levels": args.levels,
            "kmax": args.kmax,
            "threshold": args.threshold,
        },
        "result": {
            "refined_stage": prof.stage,
            "base_size": prof.base_size,
            "exceptions": [{"k": k, "ratio": r} for k, r in prof.exceptions],
            "sup_outside": prof.sup_outside,
            "sup_outside_at": prof.sup_outside_at,
        },
    }
    if prof.ratios is not None:
        payload["rows"] = [{"k": k, "ratio": r} for k, r in prof.ratios]
    return payload


def _h_arithmetic(args, spec):
    rep = analysis.arithmetic_report(spec, args.horizon, args.tau, args.min_k)
    return {"inputs": {"horizon": args.horizon, "tau": args.tau, "min_k": args.min_k}, "report": rep}


def _h_divisibility(args, spec):
    g, verdict = analysis.divisibility_gcd(spec, args.horizon)
    return {
        "inputs": {"horizon": args.horizon},
        "result": {"gcd": g, "verdict": verdict},
    }


def _h_wde(args, spec):
    A = _levels(spec, args.a_stage, args.a_levels)
    B = _levels(spec, args.b_stage, args.b_levels)
    n = analysis.wde_probe(spec, A, B, args.nmax)
    return {
        "inputs": {
            "a_stage": args.a_stage,
            "a_levels": args.a_levels,
            "b_stage": args.b_stage,
            "b_levels": args.b_levels,
            "nmax": args.nmax,
        },
        "result": {"first_shift": n, "found": n is not None},
    }


def _h_koopman(args, spec):
    if args.k:
        ks = args.k
    else:
        if args.kmin is None or args.kmax is None:
            raise ValueError("need either --k or --samples with --kmin/--kmax")
        rng = oracle.SplitMix64(args.seed)
        span = args.kmax - args.kmin
        if span <= 0:
            raise ValueError("need kmin < kmax")
        ks = [args.kmin + rng.next_below(span) for _ in range(args.samples)]
    B = _levels(spec, args.stage, args.levels)
    rep = analysis.koopman_decay_check(spec, B, ks)
    return {
        "inputs": {
            "stage": args.stage,
            "levels": args.levels,
            "shifts": len(ks),
            "seed": args.seed,
        },
        "report": rep,
    }


def _h_oracle_descendants(args, spec):
    D = oracle.brute_descendants(spec, args.i, args.j, args.b)
    agrees = D == descendant_set(spec, args.i, args.j, args.b)
    return {
        "inputs": {"i": args.i, "j": args.j, "b": args.b},
        "result": {"size": len(D), "descendants": list(D), "agrees_with_exact": agrees},
    }


def _h_oracle_tuples(args, spec):
    brute = oracle.brute_tuple_fraction(spec, args.i, args.j, args.k)
    exact = analysis.cons_fraction_exact(spec, args.i, args.j, args.k)
    return {
        "inputs": {"i": args.i, "j": args.j, "k": args.k},
        "result": {"brute": brute, "exact": exact, "agrees": brute == exact},
    }


def _h_oracle_mc(args, spec):
    B = _levels(spec, args.stage, args.levels)
    est, err = oracle.monte_carlo_measure(spec, B, args.k, args.samples, args.seed)
    exact = tower.translate_intersection_measure(spec, B, args.k)
    return {
        "inputs": {
            "stage": args.stage,
            "levels": args.levels,
            "k": args.k,
            "samples": args.samples,
            "seed": args.seed,
        },
        "result": {
            "estimate": est,
            "stderr": err,
            "exact": exact,
            "abs_error": abs(est - exact),
        },
    }


def _h_oracle_orbit(args, spec):
    p = tower.point(spec, args.stage, args.height, args.offset)
    agrees = oracle.stepwise_orbit_check(spec, p, args.k)
    q = tower.apply_pointwise(spec, p, args.k)
    return {
        "inputs": {
            "stage": args.stage,
            "height": args.height,
            "offset": args.offset,
            "k": args.k,
        },
        "result": {
            "agrees": agrees,
            "image_stage": q.stage,
            "image_height": q.height,
            "image_offset": q.offset,
        },
    }


# -- parser -------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(
        prog="rankone",
        description="Exact certificates for rank-one constructions of infinite measure.",
    )
    sub = top.add_subparsers(dest="command", required=True)

    def cmd(name: str, handler, help_: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_)
        _add_common(p)
        p.set_defaults(handler=handler)
        return p

    p = cmd("describe", _h_describe, "stage table: r, h, height-set size, descendant spread")
    p.add_argument("-n", "--stages", type=int, default=8)

    p = cmd("heights", _h_heights, "height set of one stage")
    p.add_argument("-n", "--stage", type=int, required=True)

    p = cmd("descendants", _h_descendants, "descendant heights of a level")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--b", type=int, default=0)

    p = cmd("measure", _h_measure, "exact overlap measure under a shift")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--levels", type=_int_list, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--other-stage", type=int, dest="other_stage")
    p.add_argument("--other-levels", type=_int_list, dest="other_levels")

    p = cmd("check-cons", _h_check_cons, "sufficient condition for a conservative power")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--threshold", type=_fraction, default=Fraction(1, 1000))

    p = cmd("check-noncons", _h_check_noncons, "finite-horizon non-conservativity certificate")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--floor", type=_fraction, default=Fraction(1, 2))

    p = cmd("check-nonerg", _h_check_nonerg, "pair-realignment certificate against ergodicity")
    p.add_argument("--b", type=int, required=True)
    p.add_argument("--horizon", type=int, required=True)

    p = cmd("rigidity", _h_rigidity, "best rigidity shift of one stage")
    p.add_argument("-n", "--stage", type=int, required=True)

    p = cmd("alpha", _h_alpha, "partial-rigidity profile of a level set")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--levels", type=_int_list, default=[0])
    p.add_argument("--kmax", type=int, required=True)
    p.add_argument("--threshold", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--dump", action="store_true", help="include every (k, ratio) row")

    p = cmd("arithmetic", _h_arithmetic, "recurring staircase-pattern report")
    p.add_argument("--horizon", type=int, required=True)
    p.add_argument("--tau", type=_fraction, default=Fraction(1, 2))
    p.add_argument("--min-k", type=int, dest="min_k", default=-1)

    p = cmd("divisibility", _h_divisibility, "gcd of height-set elements")
    p.add_argument("--horizon", type=int, required=True)

    p = cmd("wde", _h_wde, "first shift moving one set across itself and another")
    p.add_argument("--a-stage", type=int, required=True)
    p.add_argument("--a-levels", type=_int_list, required=True)
    p.add_argument("--b-stage", type=int, required=True)
    p.add_argument("--b-levels", type=_int_list, required=True)
    p.add_argument("--nmax", type=int, required=True)

    p = cmd("koopman", _h_koopman, "overlap-decay window check for the doubling family")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--levels", type=_int_list, default=[0])
    p.add_argument("--k", type=_int_list, default=[])
    p.add_argument("--samples", type=int, default=200)
    p.add_argument("--kmin", type=int)
    p.add_argument("--kmax", type=int)
    p.add_argument("--seed", type=int, default=0)

    po = sub.add_parser("oracle", help="independent brute-force cross-checks")
    osub = po.add_subparsers(dest="oracle_command", required=True)

    def ocmd(name: str, handler, help_: str) -> argparse.ArgumentParser:
        p = osub.add_parser(name, help=help_)
        _add_common(p)
        p.set_defaults(handler=handler)
        return p

    p = ocmd("descendants", _h_oracle_descendants, "descendants by literal unfolding")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--b", type=int, default=0)

    p = ocmd("tuples", _h_oracle_tuples, "tuple fraction by exhaustive scan")
    p.add_argument("--i", type=int, required=True)
    p.add_argument("--j", type=int, required=True)
    p.add_argument("--k", type=int, required=True)

    p = ocmd("mc", _h_oracle_mc, "overlap measure by seeded sampling")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--levels", type=_int_list, default=[0])
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)

    p = ocmd("orbit", _h_oracle_orbit, "pointwise map vs single steps")
    p.add_argument("--stage", type=int, required=True)
    p.add_argument("--height", type=int, required=True)
    p.add_argument("--offset", type=_fraction, default=Fraction(0))
    p.add_argument("--k", type=int, required=True)

    return top


def _print_warning(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {message}", file=sys.stderr)


def main(argv=None) -> int:
    warnings.showwarning = _print_warning
    args = build_parser().parse_args(argv)
    try:
        spec = load_spec(args.spec, args)
        payload = args.handler(args, spec)
    except SpecFileError as e:
        print(f"spec error: {e}", file=sys.stderr)
        return 2
    except BudgetExceeded as e:
        print(f"budget exceeded: {e}", file=sys.stderr)
        return 3
    except (PreconditionError, ValueError) as e:
        print(f"precondition failed: {e}", file=sys.stderr)
        return 4
    except Exception:  # pragma: no cover - defensive
        traceback.print_exc()
        return 1
    command = args.command if args.command != "oracle" else f"oracle-{args.oracle_command}"
    out: dict = {"command": command, "spec": _spec_block(spec)}
    if "report" in payload:
        payload = dict(payload)
        payload["report"] = _report_block(payload["report"])
    out.update(payload)
    _emit(out, args.format, sys.stdout)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
