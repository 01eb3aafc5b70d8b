"""Command-line interface: ``skewberk <command> --map MAP [options]``.

Every JSON output is wrapped in an envelope carrying the schema version,
package version, canonical map, mode, budgets and seed, and is written with
sorted keys so identical invocations produce identical bytes.  Exit codes:
0 success, 1 input error, 2 failed hypothesis, 3 exhausted budget.

Environment: SKEWBERK_VERBOSE=1 prints tracebacks on errors.
"""

from __future__ import annotations

import argparse
import json
import os
import random
import sys
import traceback
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import __version__
from .berk import BerkPoint
from .cover import BallCover, classify_point
from .errors import (
    BudgetExceeded,
    CriticalInK,
    DegenerateEigenspace,
    HypothesisFailed,
    IndeterminateOrder,
    InsufficientPrecision,
    NoCover,
    NotType2,
    RootsOfUnityUnavailable,
    SkewBerkError,
    SplittingFieldRequired,
)
from .series import PuiseuxSeries, fmt_exponent
from .skew import DEFAULT_BUDGET, SkewMap

SCHEMA = "skewberk/1"

HYPOTHESIS_ERRORS = (
    CriticalInK,
    HypothesisFailed,
    NoCover,
    DegenerateEigenspace,
    NotType2,
    SplittingFieldRequired,
    RootsOfUnityUnavailable,
)
BUDGET_ERRORS = (BudgetExceeded, InsufficientPrecision, IndeterminateOrder)


@dataclass
class RunConfig:
    command: str
    map_spec: dict
    mode: str
    seed: int
    budgets: dict
    out: str | None

    def envelope(self, result) -> dict:
        return {
            "schema": SCHEMA,
            "version": __version__,
            "command": self.command,
            "map": self.map_spec,
            "mode": self.mode,
            "budgets": self.budgets,
            "seed": self.seed,
            "result": result,
        }


# input helpers -----------------------------------------------------------------


def _load_json(text: str) -> dict:
    """A JSON object given inline or as a path to a file."""
    s = text.strip()
    if not s.startswith("{"):
        s = Path(text).read_text()
    obj = json.loads(s)
    if not isinstance(obj, dict):
        raise ValueError("expected a JSON object")
    return obj


def _load_map(args) -> SkewMap:
    obj = _load_json(args.map)
    f = SkewMap.from_json(obj, strict=not args.allow_nonstrict)
    if args.mode == "numeric":
        h = {j: PuiseuxSeries({e: complex(a) for e, a in s.items()}, s.trunc) for j, s in f.h.items()}
        f = SkewMap(f.d, f.c, h, strict=f.strict, mode="numeric")
    return f


def _point(text: str) -> BerkPoint:
    s = text.strip()
    if s.startswith("zeta") or s == "gauss":
        return BerkPoint.gauss() if s == "gauss" else BerkPoint.parse(s)
    return BerkPoint.rigid(PuiseuxSeries.parse(s))


def _word(text: str) -> list:
    return [int(x) for x in text.replace("-", ",").split(",") if x.strip()]


def _complex(text: str) -> complex:
    return complex(text.replace(" ", "").replace("i", "j"))


# commands ----------------------------------------------------------------------


def cmd_critical(f, args):
    rows = [b.to_json() for b in f.critical_data(args.precision, args.budget)]
    return {"branches": rows, "rho0": fmt_exponent(f.rho0())}


def cmd_orbit(f, args):
    x = _point(args.point)
    out = [str(x)]
    for _ in range(args.iterations):
        x = f.apply_point(x)
        out.append(str(x))
    return {"orbit": out}


def _cover(f, args, depth=None):
    return BallCover.build(f, args.depth if depth is None else depth, args.t0)


def cmd_cover(f, args):
    return _cover(f, args).to_json()


def _graph(f, args):
    from .markov import build_graph, galois_quotient, parry

    cover = _cover(f, args, 0)
    g = build_graph(f, cover, args.level)
    if args.laurent:
        g = galois_quotient(g)
    return g, parry(g)


def cmd_graph(f, args):
    g, p = _graph(f, args)
    out = g.to_json(p)
    out["column_sums"] = g.column_sums()
    out["primitive"] = g.is_primitive()
    return out


def cmd_measure(f, args):
    from .markov import cylinder_mass, equidistribution_check

    g, p = _graph(f, args)
    out = {"parry": [fmt_exponent(m) for m in p.M]}
    if args.word:
        w = _word(args.word)
        out["word"] = w
        out["mass"] = fmt_exponent(cylinder_mass(p, w))
    if args.n is not None:
        out["equidistribution"] = equidistribution_check(f, g, p, PuiseuxSeries.parse(args.x0), args.n).to_json()
    return out


def cmd_green(f, args):
    from .green import g_na

    return g_na(f, _point(args.point), args.budget).to_json()


def cmd_classify(f, args):
    cover = level = None
    if args.level is not None:
        cover, level = _cover(f, args, args.level), args.level
    return classify_point(f, _point(args.point), args.budget, cover, level).to_json()


def cmd_mult_bound(f, args):
    from .multiplicity import bound_multiplicity

    return bound_multiplicity(f, None, args.level).to_json()


def cmd_mult_witness(f, args):
    from .multiplicity import unbounded_witness

    return unbounded_witness(f, args.branch, args.n_max, args.t0).to_json()


def cmd_curve(f, args):
    from .curves import itinerary_to_curve

    g, _ = _graph(f, args)
    return itinerary_to_curve(f, g, _word(args.word), args.precision).to_json()


def cmd_plaques(f, args):
    from .curves import CSV_HEADER, emit_plaques

    g, p = _graph(f, args)
    samples = emit_plaques(f, g, p, args.count, args.depth, args.radius, args.seed, args.precision)
    rows = [CSV_HEADER]
    for s in samples:
        rows.extend(s.csv_rows())
    warnings = [{"itinerary": list(s.itinerary), "warning": s.warning} for s in samples if s.warning]
    return {"csv": rows, "warnings": warnings}


def cmd_normalize(_f, args):
    from .normal import GermMap, normalize, verify_conjugacy

    obj = _load_json(args.germ)
    M = int(obj.get("M", args.degree))
    g = GermMap.from_json({**obj, "M": M})
    nf = normalize(g, M)
    out = nf.to_json()
    out["verified"] = verify_conjugacy(g, nf)
    return out


def cmd_complex_orbit(f, args):
    from .complexdyn import CSV_HEADER, iterate_orbit

    rec = iterate_orbit(f, (_complex(args.z), _complex(args.w)), args.iterations)
    if args.format == "csv":
        return {"csv": [CSV_HEADER] + rec.csv_rows(), "stop": rec.stop}
    return rec.to_json()


def cmd_rate(f, args):
    from .complexdyn import attraction_rate, green_complex, iterate_orbit

    p = (_complex(args.z), _complex(args.w))
    r = attraction_rate(iterate_orbit(f, p, args.iterations), f.c, f.d)
    g = green_complex(f, p)
    out = r.to_json()
    out["green"] = g if g != float("-inf") else "-inf"
    return out


def cmd_crosscheck(f, args):
    from .complexdyn import crosscheck
    from .curves import heuristic_radius, itinerary_to_curve
    from .markov import sample_itinerary

    g, p = _graph(f, args)
    rng = random.Random(args.seed)
    curve_pts = []
    for i in range(args.count):
        w = sample_itinerary(p, args.depth + 1, args.seed * 1_000_003 + i)
        cg = itinerary_to_curve(f, g, w, args.precision)
        r = min(heuristic_radius(cg.series.terms_below(cg.certified_order)), 0.1)
        curve_pts.append((cg, complex(rng.uniform(0.2, 1.0) * r)))
    generic = []
    for _ in range(args.count):
        generic.append((complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3)), complex(rng.uniform(-0.3, 0.3), rng.uniform(-0.3, 0.3))))
    return crosscheck(f, g, curve_pts, generic, args.iterations).to_json()


COMMANDS = {
    "critical": cmd_critical,
    "orbit": cmd_orbit,
    "cover": cmd_cover,
    "graph": cmd_graph,
    "measure": cmd_measure,
    "green": cmd_green,
    "classify": cmd_classify,
    "mult-bound": cmd_mult_bound,
    "mult-witness": cmd_mult_witness,
    "curve": cmd_curve,
    "plaques": cmd_plaques,
    "normalize": cmd_normalize,
    "complex-orbit": cmd_complex_orbit,
    "rate": cmd_rate,
    "crosscheck": cmd_crosscheck,
}


# parser --------------------------------------------------------------------------


def _positive(text: str) -> int:
    v = int(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _exponent(text: str):
    return Fraction(text)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="skewberk", description="Dynamics of superattracting skew products over Puiseux series.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--map", help='map JSON, inline or a file path, e.g. \'{"d":4,"c":2,"h":{"0":"-z^4"}}\'')
    common.add_argument("--mode", choices=["exact", "numeric"], default="exact", help="coefficient arithmetic (default exact)")
    common.add_argument("--allow-nonstrict", action="store_true", help="accept c >= d")
    common.add_argument("--seed", type=int, default=0, help="RNG seed, recorded in the output (default 0)")
    common.add_argument("--precision", type=_positive, default=30, help="series precision exponent (default 30)")
    common.add_argument("--depth", type=_positive, default=3, help="cover depth or itinerary length (default 3)")
    common.add_argument("--budget", type=_positive, default=DEFAULT_BUDGET, help=f"iteration budget (default {DEFAULT_BUDGET})")
    common.add_argument("--iterations", type=_positive, default=25, help="orbit length (default 25)")
    common.add_argument("--level", type=int, default=None, help="Markov level N (default: least critical-free level)")
    common.add_argument("--t0", type=_exponent, default=None, help="radius exponent of the root ball")
    common.add_argument("--out", default=None, help="write output here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, help_text):
        return sub.add_parser(name, parents=[common], help=help_text)

    add("critical", "critical branches with J, nu, Crit+ and escape status")
    p = add("orbit", "forward orbit of a Berkovich point")
    p.add_argument("--point", required=True, help="'zeta(center, t)', 'gauss' or a rigid series")
    add("cover", "nested ball cover down to --depth")
    p = add("graph", "Markov graph and Parry vector")
    p.add_argument("--laurent", action="store_true", help="quotient by Galois conjugacy")
    p = add("measure", "cylinder masses and preimage equidistribution")
    p.add_argument("--laurent", action="store_true")
    p.add_argument("--word", help="comma-separated vertex word")
    p.add_argument("--n", type=int, default=None, help="preimage depth for equidistribution")
    p.add_argument("--x0", default="0", help="base point for preimages (default 0)")
    p = add("green", "non-Archimedean Green function")
    p.add_argument("--point", required=True)
    p = add("classify", "escape / in-K classification")
    p.add_argument("--point", required=True)
    add("mult-bound", "multiplicity bound on K")
    p = add("mult-witness", "unbounded-multiplicity witness")
    p.add_argument("--branch", type=int, default=0, help="critical branch index")
    p.add_argument("--n-max", type=int, default=12)
    p = add("curve", "curve with a given itinerary")
    p.add_argument("--word", required=True)
    p.add_argument("--laurent", action="store_true")
    p = add("plaques", "Parry-weighted plaque samples as CSV")
    p.add_argument("--count", type=_positive, default=10)
    p.add_argument("--radius", type=float, default=None, help="sampling radius (default: heuristic)")
    p.add_argument("--laurent", action="store_true")
    p = add("normalize", "formal normal form of a germ")
    p.add_argument("--germ", required=True, help='{"fz": ..., "fw": ..., "M": int}, inline or a path')
    p.add_argument("--degree", type=_positive, default=10)
    for name, help_text in (("complex-orbit", "numeric orbit in log form"), ("rate", "attraction rate and complex Green function")):
        p = add(name, help_text)
        p.add_argument("--z", required=True)
        p.add_argument("--w", required=True)
        if name == "complex-orbit":
            p.add_argument("--format", choices=["json", "csv"], default="json")
    p = add("crosscheck", "complex rates on curve points versus generic points")
    p.add_argument("--count", type=_positive, default=10)
    p.add_argument("--laurent", action="store_true")
    return ap


def _budgets(args) -> dict:
    keys = ("precision", "depth", "budget", "iterations", "level", "t0", "count", "n", "n_max", "degree", "radius")
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = fmt_exponent(v) if isinstance(v, Fraction) else v
    return out


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if not hasattr(args, "laurent"):
        args.laurent = False
    try:
        if args.command == "normalize":
            f, spec = None, None
        else:
            if not args.map:
                raise ValueError("--map is required")
            f = _load_map(args)
            spec = f.to_json()
        cfg = RunConfig(args.command, spec, args.mode, args.seed, _budgets(args), args.out)
        result = COMMANDS[args.command](f, args)
    except HYPOTHESIS_ERRORS as exc:
        return _fail(2, exc)
    except BUDGET_ERRORS as exc:
        return _fail(3, exc)
    except (SkewBerkError, ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        return _fail(1, exc)
    env = cfg.envelope(result)
    if isinstance(result, dict) and "csv" in result and args.command in ("plaques", "complex-orbit"):
        meta = {k: v for k, v in env.items() if k != "result"}
        extra = {k: v for k, v in result.items() if k != "csv"}
        head = "# " + json.dumps({**meta, **extra}, sort_keys=True)
        _emit("\n".join([head] + result["csv"]) + "\n", args.out)
    else:
        _emit(json.dumps(env, sort_keys=True, indent=2) + "\n", args.out)
    return 0


def _fail(code: int, exc: Exception) -> int:
    kind = {1: "input error", 2: "hypothesis failed", 3: "budget exhausted"}[code]
    print(f"skewberk: {kind}: {type(exc).__name__}: {exc}", file=sys.stderr)
    if os.environ.get("SKEWBERK_VERBOSE"):
        traceback.print_exc()
    return code


if __name__ == "__main__":
    sys.exit(main())
