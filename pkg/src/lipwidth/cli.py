"""Command-line front end: ``lipwidth <subcommand> [flags]``.

Exit codes: 0 success, 2 usage or validation error, 3 resource limit,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .approximation import (
    SCHEMA,
    MonteCarlo,
    PCExpansion,
    TensorQuadrature,
    builtin_operator,
    l2_error,
    project,
    sobolev_norm,
)
from .errors import (
    LipwidthError,
    NonFiniteValue,
    QuadratureTooCoarse,
    ResourceLimit,
    SetTooLarge,
)
from .index_sets import enumerate_rearrangement
from .spectrum import (
    Algebraic,
    DoubleExponential,
    Explicit,
    Exponential,
    Spectrum,
    make_spectrum,
    spectrum_from_dict,
    validate_assumption,
)
from .widths import (
    LOWER_THM,
    SHARP_EXP,
    UPPER_ALG,
    UPPER_DEXP,
    UPPER_EXP,
    check_curve,
    enumerated_weights,
    geometric_grid,
    lower_bound_constant,
    stesin_width,
    tune_eta,
    width_curve,
)

EXIT_USAGE = 2
EXIT_RESOURCE = 3
EXIT_NUMERIC = 4

BOUND_NAMES = {
    "lower": LOWER_THM,
    "upper-algebraic": UPPER_ALG,
    "upper-exponential": UPPER_EXP,
    "upper-double-exponential": UPPER_DEXP,
    "sharp-exp": SHARP_EXP,
    # short aliases
    "4.3": LOWER_THM,
    "4.4a": UPPER_ALG,
    "4.4b": UPPER_EXP,
    "4.4c": UPPER_DEXP,
}


class UsageError(Exception):
    pass


# ---------------------------------------------------------------------------
# Parsing helpers


def _kv(text: str) -> dict[str, float]:
    out = {}
    for part in filter(None, text.split(",")):
        if "=" not in part:
            raise UsageError(f"expected key=value, got {part!r}")
        k, v = part.split("=", 1)
        try:
            out[k.strip()] = float(v)
        except ValueError:
            raise UsageError(f"not a number: {v!r}") from None
    return out


def _read_values(path: str) -> list[float]:
    """A JSON list, a JSON object with ``values``, or one number per line."""
    text = Path(path).read_text()
    stripped = text.strip()
    if stripped.startswith(("[", "{")):
        obj = json.loads(stripped)
        if isinstance(obj, dict):
            obj = obj.get("values")
        if not isinstance(obj, list):
            raise UsageError(f"{path}: expected a list of numbers")
        return [float(v) for v in obj]
    vals = []
    for row in csv.reader(io.StringIO(text)):
        if row and row[0].strip() and not row[0].lstrip().startswith("#"):
            vals.append(float(row[0]))
    return vals


def parse_spectrum(family: str, b: str, dim_cap: int | None) -> Spectrum:
    """Build a spectrum from ``--family``, ``--b`` and ``--dim-cap``."""
    name, _, rest = family.partition(":")
    bval: str | list[float] = b
    if b.startswith("file:"):
        bval = _read_values(b[5:])
    elif b not in ("ones", "sqrt-lambda"):
        raise UsageError(f"--b must be ones, sqrt-lambda or file:PATH, got {b!r}")

    if name == "file":
        path = rest
        text = Path(path).read_text().strip()
        if text.startswith("{") and "family" in json.loads(text):
            obj = json.loads(text)
            if b != "ones":
                obj["b"] = bval
            return spectrum_from_dict(obj)
        fam = Explicit(_read_values(path))
        cap = len(fam.values)
    else:
        p = _kv(rest)
        try:
            if name == "alg":
                fam = Algebraic(p["alpha"])
            elif name == "exp":
                fam = Exponential(p["alpha"], p["beta"])
            elif name == "dexp":
                fam = DoubleExponential(p["alpha"])
            else:
                raise UsageError(f"unknown family {name!r}")
        except KeyError as exc:
            raise UsageError(f"family {name!r} needs parameter {exc}") from None
        cap = dim_cap or 10
    if not isinstance(bval, str):
        cap = min(cap, len(bval))
    return make_spectrum(fam, bval, cap)


def _emit(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj: dict) -> str:
    return json.dumps({"schema": SCHEMA, **obj}, indent=2) + "\n"


def _g(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------------------
# Subcommands


def cmd_spectrum(args) -> int:
    s = parse_spectrum(args.family, args.b, args.dim_cap)
    n = min(args.dim_cap or s.dim_cap, s.max_index)
    report = validate_assumption(s, codomain_infinite=args.codomain_infinite)
    rows = [(i, s.eigenvalue(i), s.b_value(i), s.weighted(i)) for i in range(1, int(n) + 1)]
    if args.format == "json":
        _emit(args, _json({
            "spectrum": s.to_dict(),
            "validation": report.to_dict(),
            "rows": [{"i": i, "lambda": lam, "b": bi, "lambda_b": lb} for i, lam, bi, lb in rows],
        }))
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["i", "lambda", "b", "lambda_b"])
        for i, lam, bi, lb in rows:
            w.writerow([i, _g(lam), _g(bi), _g(lb)])
        _emit(args, buf.getvalue())
    for m in report.messages:
        print(f"lipwidth: {m}", file=sys.stderr)
    if not report.ok:
        print("lipwidth: spectrum fails validation", file=sys.stderr)
        return EXIT_USAGE
    return 0


def cmd_enumerate(args) -> int:
    s = parse_spectrum(args.family, args.b, args.dim_cap)
    r = enumerate_rearrangement(s, args.count)
    if args.format == "json":
        _emit(args, _json(r.to_dict()))
    else:
        _emit(args, r.to_csv())
    return 0


def cmd_width_curve(args) -> int:
    s = parse_spectrum(args.family, args.b, args.dim_cap)
    if args.m_max < 1:
        raise UsageError("--m-max must be >= 1")
    ms = geometric_grid(args.m_max) if args.grid == "geometric" else list(range(1, args.m_max + 1))
    c = width_curve(s, ms)
    _emit(args, _json(c.to_dict()) if args.format == "json" else c.to_csv())
    return 0


def _curve_params(kind: str, args, s: Spectrum) -> dict:
    fam = s.family

    def pick(name, default=None):
        v = getattr(args, name)
        if v is not None:
            return v
        if hasattr(fam, name) and not isinstance(fam, Explicit):
            return getattr(fam, name)
        if default is None:
            raise UsageError(f"--{name} is required")
        return default

    if kind == LOWER_THM:
        p = args.p or 1
        return {"C": lower_bound_constant(s, p), "p": p}
    if kind == UPPER_ALG:
        return {"alpha": pick("alpha"), "delta": args.delta if args.delta is not None else 0.5}
    if kind == UPPER_EXP:
        return {"alpha": pick("alpha"), "beta": pick("beta"), "delta": args.delta if args.delta is not None else 1.0}
    if kind == UPPER_DEXP:
        return {"delta": args.delta if args.delta is not None else 1.0, "eta": args.eta if args.eta is not None else 0.5}
    return {
        "alpha": pick("alpha"),
        "beta": pick("beta"),
        "delta": args.delta if args.delta is not None else 0.5,
        "prefactor": args.prefactor,
    }


def cmd_verify(args) -> int:
    kind = BOUND_NAMES.get(args.theorem)
    if kind is None:
        raise UsageError(f"unknown --theorem {args.theorem!r}; choose from {', '.join(BOUND_NAMES)}")
    s = parse_spectrum(args.family, args.b, args.dim_cap)
    params = _curve_params(kind, args, s)
    u, cert = enumerated_weights(s, args.k_max)
    extra = {}
    if kind == UPPER_ALG:
        if args.eta is not None:
            params["eta"] = args.eta
        else:
            lo, hi = max(2, args.k_max // 100), max(2, args.k_max // 10)
            params["eta"] = tune_eta(kind, params, u, lo, hi)
            extra["eta_calibration_window"] = [lo, hi]
    v = check_curve(kind, params, u, 2 if kind in (UPPER_ALG, UPPER_EXP, UPPER_DEXP) else 1)
    out = {"spectrum": s.to_dict(), "k_max": args.k_max, "certified": cert, **v.to_dict(), **extra}
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["kind", "status", "holds_from", "max_violation", "certified"])
        w.writerow([v.kind, out["status"], v.holds_from if v.holds else "", _g(v.max_violation), str(cert).lower()])
        _emit(args, buf.getvalue())
    else:
        _emit(args, _json(out))
    return 0


def _float_or_inf(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def cmd_stesin(args) -> int:
    w = _read_values(args.weights)
    val = stesin_width(w, args.p, args.q, args.m)
    if args.format == "json":
        _emit(args, _json({"p": "inf" if math.isinf(args.p) else args.p, "q": args.q, "m": args.m, "value": val}))
    else:
        _emit(args, f"value\n{_g(val)}\n")
    return 0


def cmd_approximate(args) -> int:
    s = parse_spectrum(args.family, args.b, args.dim_cap)
    kind, _, path = args.operator.partition(":")
    if kind == "finite-pc":
        E = PCExpansion.from_json(Path(path).read_text(), s)
        F = builtin_operator("finite-pc", {"expansion": E}, s)
    elif kind == "norm":
        F = builtin_operator("norm", {"dim": args.dim}, s)
    elif kind == "capped":
        F = builtin_operator("capped", json.loads(Path(path).read_text()), s)
    else:
        raise UsageError(f"unknown operator {args.operator!r}")
    if args.s < 0:
        raise UsageError("--s must be >= 0")
    r = enumerate_rearrangement(s, args.s + 1)
    S = [g for g in r.indices[: args.s] if g.max_support <= F.active_dim]
    if F.degree is not None:
        method = TensorQuadrature(args.quad_nodes)
    else:
        method = MonteCarlo(args.mc, args.seed)
    G = project(F, S, s, method)
    # fresh stream so a Monte Carlo fit is not scored on its own samples
    est = l2_error(F, G, s, args.mc, (args.seed + 1) % 2**64)
    out = {
        "operator": args.operator,
        "s": args.s,
        "u_bound": r[args.s].weight,
        "certified": r.certified,
        "projection_method": "quadrature" if isinstance(method, TensorQuadrature) else "monte-carlo",
        "mc_error": est.error,
        "mean_square": est.mean_square,
        "ci": [max(est.mean_square - est.half_width_95, 0.0), est.mean_square + est.half_width_95],
        "samples": est.samples_used,
        "seed": args.seed,
    }
    if est.exact is not None:
        out["error"] = math.sqrt(est.exact)
        out["sobolev_norm"] = sobolev_norm(F.expansion, s)
    else:
        out["error"] = est.error
    _emit(args, _json(out))
    return 0


# ---------------------------------------------------------------------------
# Parser


def _spectrum_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", default="alg:alpha=2",
                   help="alg:alpha=A | exp:alpha=A,beta=B | dexp:alpha=A | file:PATH")
    p.add_argument("--b", default="ones", help="ones | sqrt-lambda | file:PATH")
    p.add_argument("--dim-cap", type=int, default=None, help="rows to materialize / validate")


def _common(p: argparse.ArgumentParser, default_format: str = "csv") -> None:
    p.add_argument("--format", choices=("csv", "json"), default=default_format)
    p.add_argument("--output", default=None, help="write to this file instead of stdout")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lipwidth", description="Sobolev weights, widths and PC approximation.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="validate a spectrum and list weighted eigenvalues")
    _spectrum_flags(p)
    p.add_argument("--codomain-infinite", action="store_true")
    _common(p)
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("enumerate", help="first k indices by nonincreasing weight")
    _spectrum_flags(p)
    p.add_argument("--count", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("width-curve", help="adaptive m-widths on an m grid")
    _spectrum_flags(p)
    p.add_argument("--m-max", type=int, required=True)
    p.add_argument("--grid", choices=("geometric", "linear"), default="geometric")
    _common(p)
    p.set_defaults(func=cmd_width_curve)

    p = sub.add_parser("verify", help="check a bound curve against enumerated widths")
    _spectrum_flags(p)
    p.add_argument("--theorem", required=True, help=", ".join(BOUND_NAMES))
    p.add_argument("--p", type=int, default=None)
    p.add_argument("--alpha", type=float, default=None)
    p.add_argument("--beta", type=float, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--prefactor", type=float, default=1.0)
    p.add_argument("--k-max", type=int, default=100_000)
    _common(p, "json")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("stesin", help="Kolmogorov width of a weighted lp ball in lq")
    p.add_argument("--weights", required=True, help="file with one weight per line")
    p.add_argument("--p", type=_float_or_inf, required=True)
    p.add_argument("--q", type=float, default=2.0)
    p.add_argument("--m", type=int, required=True)
    _common(p)
    p.set_defaults(func=cmd_stesin)

    p = sub.add_parser("approximate", help="project an operator on the best s indices")
    _spectrum_flags(p)
    p.add_argument("--operator", required=True, help="finite-pc:FILE | norm | capped:FILE")
    p.add_argument("--s", type=int, default=0)
    p.add_argument("--mc", type=int, default=10_000)
    p.add_argument("--quad-nodes", type=int, default=None)
    p.add_argument("--dim", type=int, default=4, help="active dimension of the norm functional")
    _common(p, "json")
    p.set_defaults(func=cmd_approximate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0) and EXIT_USAGE
    try:
        return args.func(args)
    except (ResourceLimit, SetTooLarge) as exc:
        print(f"lipwidth: resource limit: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (NonFiniteValue, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"lipwidth: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except QuadratureTooCoarse as exc:
        print(f"lipwidth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LipwidthError, UsageError, OSError, ValueError, KeyError) as exc:
        print(f"lipwidth: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
