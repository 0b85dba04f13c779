"""Command-line entry point: ``dunkl-lab {verify,spectrum,transform,manifest}``.

Exit codes: 0 success, 1 an identity failed, 2 bad configuration or input,
3 unsupported numerical regime.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import random
import sys
from fractions import Fraction
from pathlib import Path

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_REGIME = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


# ----------------------------------------------------------------------------------
# parsing helpers


def rational(text) -> Fraction:
    """Exact ``p/q`` or decimal literal; rejects floats in exponent notation."""
    text = str(text).strip()
    if "e" in text.lower() or "inf" in text.lower() or "nan" in text.lower():
        raise argparse.ArgumentTypeError(f"{text!r} is not an exact rational (use p/q)")
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a rational number") from None


def number(text) -> float:
    try:
        return float(Fraction(text)) if "/" in str(text) else float(text)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None


def positive_int(text) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def read_config(path: str) -> dict:
    """``key = value`` lines; ``#`` starts a comment; quotes around values are stripped."""
    out = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or line.startswith("["):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value.strip("\"'")
    return out


def _common(p: argparse.ArgumentParser):
    p.add_argument("--config", help="key=value file mirroring the flags (flags win)")
    p.add_argument("--N", type=positive_int)
    p.add_argument("--g", type=rational)
    p.add_argument("--gamma", type=rational)
    p.add_argument("--gamma1", type=rational)
    p.add_argument("--gamma2", type=rational)
    p.add_argument("--f", type=rational, help="exact field per particle (F = f sqrt N)")
    p.add_argument("--F", type=number, help="field strength (numeric)")
    p.add_argument("--alpha", type=rational, help="exact charge offset per particle (a = alpha sqrt N)")
    p.add_argument("--a", type=number, help="half the distance between the charges (numeric)")
    p.add_argument("--q", type=rational, help="relative angular number")
    p.add_argument("--nmax", type=positive_int)
    p.add_argument("--grid", type=positive_int, help="base number of cells")
    p.add_argument("--tol", type=number)
    p.add_argument("--format", choices=("json", "csv"))
    p.add_argument("--out", help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dunkl-lab", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run an exact identity suite")
    _common(v)
    v.add_argument("--suite", required=False)
    v.add_argument("--inject-fault", action="store_true", help="also run the fault controls")
    v.add_argument("--random-g", type=int, default=0, help="add this many seeded random couplings")
    v.add_argument("--timing", action="store_true", help="record per-case milliseconds")
    v.add_argument("--dump-operator", metavar="NAME", help="print the normal form of a catalog operator")
    v.add_argument("--term-cap", type=positive_int)

    s = sub.add_parser("spectrum", help="separated-variable spectra")
    _common(s)
    s.add_argument("--model", required=False)
    s.add_argument("--chart", choices=("spherical", "parabolic", "elliptic"))
    s.add_argument("--slope", action="store_true", help="Stark: first-order field coefficients")
    s.add_argument("--levels", type=positive_int, help="two-centre: number of node pairs")
    s.add_argument(
        "--method",
        choices=("finite_volume", "oracle"),
        help="coulomb spherical chart: tridiagonal solver or the dense finite-element oracle",
    )

    t = sub.add_parser("transform", help="coordinate charts")
    _common(t)
    t.add_argument("--from", dest="src", default="cartesian")
    t.add_argument("--to", dest="dst", default="jacobi")
    t.add_argument("--in", dest="inp", help="points file (whitespace or comma separated); default stdin")
    t.add_argument("--random", type=int, default=0, help="generate this many seeded random points instead")
    t.add_argument("--roundtrip", action="store_true", help="append the round-trip error column")

    m = sub.add_parser("manifest", help="catalog of named operators and verified forms")
    _common(m)
    return parser


def parse(argv) -> argparse.Namespace:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        cfg = read_config(args.config)
        known = {a.dest for a in parser._subparsers._group_actions[0].choices[args.command]._actions}
        unknown = sorted(set(cfg) - known - {"command"})
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(unknown)}")
        sub = parser._subparsers._group_actions[0].choices[args.command]
        explicit = parser.parse_args(argv)
        converted = {}
        for action in sub._actions:
            if action.dest in cfg:
                raw = cfg[action.dest]
                if action.nargs == 0:
                    converted[action.dest] = raw.lower() in ("1", "true", "yes", "on")
                else:
                    conv = action.type or str
                    try:
                        converted[action.dest] = conv(raw)
                    except argparse.ArgumentTypeError as exc:
                        raise ConfigError(f"config {action.dest}: {exc}") from None
                    if action.choices and converted[action.dest] not in action.choices:
                        raise ConfigError(f"config {action.dest}: {raw!r} not in {sorted(action.choices)}")
        sub.set_defaults(**converted)
        args = parser.parse_args(argv)
        del explicit
    return args


def _emit(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x + 0.0) if math.isfinite(x) else str(x)
    return str(x)


def _csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(r.get(c, "")) for c in columns])
    return buf.getvalue()


def _config_record(args, keys) -> dict:
    out = {}
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = str(v) if isinstance(v, Fraction) else v
    return out


# ----------------------------------------------------------------------------------
# verify


def _specs(args):
    from .models import ModelSpec
    from .verify import GRID_G, GRID_N, GRID_PARAMS

    if args.F is not None or args.a is not None:
        raise ConfigError("verify needs exact parameters: use --f and --alpha instead of --F and --a")
    params = dict(GRID_PARAMS)
    for key in ("gamma", "f", "alpha", "gamma1", "gamma2"):
        v = getattr(args, key)
        if v is not None:
            params[key] = v
    Ns = [args.N] if args.N else list(GRID_N)
    gs = [args.g] if args.g is not None else list(GRID_G)
    if args.random_g:
        rng = random.Random(args.seed)
        for _ in range(args.random_g):
            gs.append(Fraction(rng.randint(-9, 9), rng.randint(1, 7)))
    return [ModelSpec(N, g=g, **params) for N in Ns for g in gs]


def _parse_operator_name(text: str):
    # NAME or NAME[1,2] or NAME:1,2
    name, idx = text, ()
    for sep in ("[", ":"):
        if sep in text:
            name, rest = text.split(sep, 1)
            rest = rest.rstrip("]")
            idx = tuple(int(s) for s in rest.split(",") if s.strip())
            break
    return name.strip(), idx


def cmd_verify(args) -> int:
    from .models import CATALOG, ModelSpec, UnknownOperatorError, build_generator
    from .operators import DEFAULT_TERM_CAP
    from .verify import SUITES, dumps_report, emit_report, run_suite

    specs = _specs(args)
    if args.dump_operator:
        name, idx = _parse_operator_name(args.dump_operator)
        if name not in CATALOG:
            raise ConfigError(f"unknown operator {name!r}; see `dunkl-lab manifest`")
        spec = specs[0]
        try:
            op = build_generator(name, spec, *idx)
        except (ValueError, IndexError, UnknownOperatorError) as exc:
            raise ConfigError(str(exc)) from None
        doc = {
            "operator": args.dump_operator,
            "spec": spec.as_dict(),
            "seed": args.seed,
            "terms": len(op),
            "normal_form": op.serialize().splitlines(),
        }
        _emit(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", args.out)
        return EXIT_OK
    if args.suite is None:
        raise ConfigError("--suite is required")
    suites = list(SUITES) if args.suite == "all" else [args.suite]
    for s in suites:
        if s not in SUITES:
            raise ConfigError(f"unknown suite {s!r}; choose from {', '.join(SUITES)} or all")
    reports = []
    for s in suites:
        reports += run_suite(
            s,
            specs,
            inject_fault=args.inject_fault,
            term_cap=args.term_cap or DEFAULT_TERM_CAP,
        )
    doc = emit_report(reports, suite=args.suite, timing=args.timing)
    doc = {
        "suite": doc["suite"],
        "seed": args.seed,
        "config": _config_record(args, ("N", "g", "gamma", "f", "alpha", "gamma1", "gamma2", "inject_fault", "random_g")),
        "summary": {
            v: sum(1 for r in reports if r.verdict == v) for v in ("pass", "fail", "skipped")
        },
        "cases": doc["cases"],
    }
    if args.format == "csv":
        rows = []
        for c in doc["cases"]:
            rows.append({**{k: c[k] for k in ("label", "anchor", "verdict", "expect", "ms")}, **c["spec"], "seed": args.seed})
        cols = ["label", "anchor", "N", "g", "γ", "f", "α", "γ₁", "γ₂", "verdict", "expect", "ms", "seed"]
        _emit(_csv(rows, cols), args.out)
    else:
        _emit(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", args.out)
    return EXIT_FAIL if any(r.verdict == "fail" for r in reports) else EXIT_OK


# ----------------------------------------------------------------------------------
# spectrum


def _num(v, default):
    return float(v) if v is not None else default


def cmd_spectrum(args) -> int:
    from . import spectral as sp

    model = args.model
    if model not in ("coulomb", "stark", "two_center"):
        raise ConfigError("--model must be coulomb, stark or two_center")
    N = args.N or 3
    g = args.g if args.g is not None else Fraction(0)
    if g < 0:
        raise ConfigError("g must be non-negative")
    cells = args.grid or sp.DEFAULT_CELLS
    nmax = args.nmax or (6 if model == "coulomb" else 3)
    base = {"model": model, "N": N, "g": g, "seed": args.seed}
    rows: list[dict] = []

    if model == "coulomb":
        gamma = _num(args.gamma, 1.0)
        spectrum = {row.n: row for row in sp.assemble_spectrum(N, g, gamma, nmax)}
        chart = args.chart or "spherical"
        if chart == "spherical":
            results = sp.spectrum_from_solver(N, g, gamma, nmax, n=cells)
            if args.method == "oracle":
                results = [_oracle_row(sp, N, gamma, r) for r in results]
            for r in results:
                n = Fraction(r.labels["n"]).limit_denominator(1000)
                rows.append(
                    {
                        **base,
                        "gamma": gamma,
                        "chart": chart,
                        "n": n,
                        "q": Fraction(r.labels["q"]).limit_denominator(1000),
                        "l": Fraction(r.labels["l"]).limit_denominator(1000),
                        "n_r": r.labels["n_r"],
                        "E": r.eigenvalue,
                        "E_closed": r.extras["E_closed"],
                        "degeneracy": spectrum[n].degeneracy,
                        "residual": r.residual,
                        "method": r.method,
                    }
                )
            cols = ["model", "N", "g", "gamma", "chart", "n", "q", "l", "n_r", "E", "E_closed", "degeneracy", "residual", "method", "seed"]
        elif chart == "parabolic":
            for s in sp.parabolic_states(N, g, nmax):
                r = sp.solve_parabolic_pair(N, g, s["q"], gamma, 0.0, s["n1"], s["n2"], _pgrid(sp, N, gamma, s, cells))
                rows.append(
                    {
                        **base,
                        "gamma": gamma,
                        "chart": chart,
                        "n": s["n"],
                        "q": s["q"],
                        "n1": s["n1"],
                        "n2": s["n2"],
                        "E": r.eigenvalue,
                        "lambda1": r.extras["lambda1"],
                        "lambda2": r.extras["lambda2"],
                        "E_closed": sp.coulomb_energy(N, gamma, s["n"]),
                        "degeneracy": spectrum[s["n"]].parabolic_degeneracy,
                        "residual": r.residual,
                        "method": r.method,
                    }
                )
            cols = ["model", "N", "g", "gamma", "chart", "n", "q", "n1", "n2", "E", "lambda1", "lambda2", "E_closed", "degeneracy", "residual", "method", "seed"]
        else:
            raise ConfigError("coulomb spectra use the spherical or parabolic chart")

    elif model == "stark":
        gamma = _num(args.gamma, 1.0)
        if args.F is not None:
            F = args.F
        elif args.f is not None:
            F = float(args.f) * math.sqrt(N)
        else:
            F = 1e-5
        for s in sp.parabolic_states(N, g, nmax):
            grid = _pgrid(sp, N, gamma, s, cells)
            row = {**base, "gamma": gamma, "chart": "parabolic", "n": s["n"], "q": s["q"], "n1": s["n1"], "n2": s["n2"], "F": F}
            if args.slope:
                d = sp.stark_slope_numeric(N, g, s["q"], gamma, s["n1"], s["n2"], F=F, grid=grid)
                row.update(E0=d["E0"], slope=d["slope"], slope_closed=d["slope_closed"])
                row["rel_error"] = (
                    abs(d["slope"] - d["slope_closed"]) / abs(d["slope_closed"]) if d["slope_closed"] else abs(d["slope"]) / d["scale"]
                )
            else:
                r = sp.solve_parabolic_pair(N, g, s["q"], gamma, F, s["n1"], s["n2"], grid)
                row.update(E=r.eigenvalue, lambda1=r.extras["lambda1"], lambda2=r.extras["lambda2"], residual=r.residual)
            rows.append(row)
        if args.slope:
            cols = ["model", "N", "g", "gamma", "chart", "n", "q", "n1", "n2", "F", "E0", "slope", "slope_closed", "rel_error", "seed"]
        else:
            cols = ["model", "N", "g", "gamma", "chart", "n", "q", "n1", "n2", "F", "E", "lambda1", "lambda2", "residual", "seed"]

    else:
        g1 = _num(args.gamma1, 0.5)
        g2 = _num(args.gamma2, 0.5)
        if args.a is not None:
            a = args.a
        elif args.alpha is not None:
            a = float(args.alpha) * math.sqrt(N)
        else:
            a = 0.5
        q = args.q if args.q is not None else sp.angular_q_levels(N, g, 1)[0][0]
        levels = args.levels or 1
        pairs = [(kx, ke) for s in range(levels) for kx in range(s + 1) for ke in [s - kx]][:levels]
        for kx, ke in pairs:
            r = sp.solve_two_center(N, g, q, g1, g2, a, (kx, ke))
            rows.append(
                {
                    **base,
                    "gamma1": g1,
                    "gamma2": g2,
                    "a": a,
                    "chart": "elliptic",
                    "q": q,
                    "k_xi": kx,
                    "k_eta": ke,
                    "E": r.eigenvalue,
                    "lambda": r.extras["lambda"],
                    "E_united": sp.coulomb_energy(N, g1 + g2, q + kx + ke + 1),
                    "residual": r.residual,
                    "method": r.method,
                }
            )
        cols = ["model", "N", "g", "gamma1", "gamma2", "a", "chart", "q", "k_xi", "k_eta", "E", "lambda", "E_united", "residual", "method", "seed"]

    if args.format == "json":
        _emit(json.dumps({"seed": args.seed, "rows": [{k: _jsonable(r.get(k)) for k in cols} for r in rows]}, indent=2) + "\n", args.out)
    else:
        _emit(_csv(rows, cols), args.out)
    if args.tol is not None:
        bad = [r for r in rows if isinstance(r.get("residual"), float) and r["residual"] > args.tol]
        if bad:
            sys.stderr.write(f"{len(bad)} rows exceed residual tolerance {args.tol}\n")
            return EXIT_FAIL
    return EXIT_OK


def _oracle_row(sp, N, gamma, r):
    """Replace a finite-volume radial level by the dense finite-element oracle on the same truncation."""
    prob = sp.radial_problem(N, gamma, r.labels["l"], r.grid["R"])
    n_r = r.labels["n_r"]
    o = sp.oracle_dense(prob, n_r + 1)[n_r]
    o.labels = dict(r.labels)
    o.extras = dict(r.extras)
    return o


def _pgrid(sp, N, gamma, s, cells):
    g = sp.parabolic_grid(N, gamma, s["q"], s["n1"], s["n2"], n=cells)
    return g


def _jsonable(v):
    if isinstance(v, Fraction):
        return str(v)
    return v


# ----------------------------------------------------------------------------------
# transform


def _read_points(args, width: int) -> list[list[float]]:
    import numpy as np

    if args.random:
        rng = np.random.default_rng(args.seed)
        return [list(rng.normal(size=width)) for _ in range(args.random)]
    text = Path(args.inp).read_text() if args.inp else sys.stdin.read()
    pts = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p for p in line.replace(",", " ").split() if p]
        try:
            vals = [float(p) for p in parts]
        except ValueError:
            raise ConfigError(f"line {lineno}: not a list of numbers") from None
        if len(vals) != width:
            raise ConfigError(f"line {lineno}: expected {width} numbers, got {len(vals)}")
        pts.append(vals)
    return pts


def cmd_transform(args) -> int:
    import numpy as np

    from .coordinates import CHARTS, ChartError, chart_width, flatten, transform

    if args.src not in CHARTS or args.dst not in CHARTS:
        raise ConfigError(f"charts are {', '.join(CHARTS)}")
    N = args.N or 3
    if N < 2:
        raise ConfigError("N must be at least 2")
    a = args.a if args.a is not None else (float(args.alpha) * math.sqrt(N) if args.alpha is not None else None)
    if "elliptic" in (args.src, args.dst) and not (a and a > 0):
        raise ConfigError("elliptic chart needs --a > 0")
    win, wout = chart_width(args.src, N), chart_width(args.dst, N)
    pts = _read_points(args, win)
    cols = ["index"] + [f"{args.dst}_{k}" for k in range(wout)] + ["flag"]
    if args.roundtrip:
        cols.append("roundtrip_error")
    cols.append("seed")
    rows = []
    for i, p in enumerate(pts):
        row = {"index": i, "seed": args.seed}
        try:
            cp = transform(p, args.src, args.dst, N, a)
            vals = flatten(cp)
            for k, v in enumerate(vals):
                row[f"{args.dst}_{k}"] = float(v)
            row["flag"] = cp.flag or ""
            if args.roundtrip:
                back = flatten(transform(vals, args.dst, args.src, N, a))
                row["roundtrip_error"] = float(np.max(np.abs(back - np.asarray(p))))
        except ChartError as exc:
            row["flag"] = f"error:{exc.tag}"
        rows.append(row)
    if args.format == "json":
        _emit(json.dumps({"seed": args.seed, "rows": rows}, indent=2) + "\n", args.out)
    else:
        _emit(_csv(rows, cols), args.out)
    return EXIT_OK


def cmd_manifest(args) -> int:
    from .models import catalog_manifest
    from .verify import verified_forms

    doc = catalog_manifest(verified_forms())
    doc["seed"] = args.seed
    _emit(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", args.out)
    return EXIT_OK


COMMANDS = {"verify": cmd_verify, "spectrum": cmd_spectrum, "transform": cmd_transform, "manifest": cmd_manifest}


def main(argv=None) -> int:
    from .coordinates import ChartError
    from .spectral import SpectralError, UnsupportedRegimeError

    try:
        args = parse(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # argparse errors
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    except ConfigError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except ChartError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG
    except UnsupportedRegimeError as exc:
        sys.stderr.write(f"unsupported regime: {exc}\n")
        return EXIT_REGIME
    except SpectralError as exc:
        sys.stderr.write(f"solver failure: {exc}\n")
        return EXIT_REGIME
    except (ValueError, TypeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
