"""Command-line front end.

Exit codes: 0 success, 1 numerical or solver failure, 2 a violated exact
inequality, 64 bad configuration or invalid input.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .bounds import DEFAULT_SLACK, EXACT_CHECKS, check_report
from .channels import dephasing_channel, erasure_channel, identity_channel
from .codes import IsometryError, custom_code, reed_muller_code, thermodynamic_code, trivial_code
from .convex import SolverError
from .measures import analyze, kl_residual, unitary_qfi
from .measures.covariance import DEFAULT_GRID
from .measures.metrology import build_problem
from .schemas import SchemaError, validate
from .tensor import DimensionError, random_hermitian, spectral_range

EXIT_OK, EXIT_SOLVER, EXIT_BOUND, EXIT_CONFIG = 0, 1, 2, 64
SIG_DIGITS = 12

PARAM_COLUMNS = ["code", "t", "n", "m", "q", "noise", "p"]
MEASURE_COLUMNS = ["epsilon", "delta_group", "delta_point", "delta_charge", "chi", "j_min", "f_reg",
                   "gamma_lower", "gamma_upper", "delta_h_logical", "delta_h_physical"]
BOUND_NAMES = ["theorem1", "theorem2", "theorem4_point", "theorem4_charge", "chi_bound"]
ROW_COLUMNS = (PARAM_COLUMNS + MEASURE_COLUMNS
               + [f"{b}_{k}" for b in BOUND_NAMES for k in ("lhs", "rhs", "ok")]
               + ["exact_ok", "error"])


class ConfigError(ValueError):
    pass


# instances

def build_instance(inst: dict):
    """``(code, sym, noise)`` from a flat parameter dict."""
    kind = inst["code"]
    if kind == "rm":
        code, sym = reed_muller_code(int(inst.get("t") or 3))
    elif kind == "thermo":
        code, sym = thermodynamic_code(int(inst.get("n") or 10), int(inst.get("m") or 2), float(inst.get("q") or 0.0))
    elif kind == "trivial":
        if inst.get("n") is None:
            raise ConfigError("--code trivial needs --n")
        code, sym = trivial_code(int(inst["n"]))
    elif kind == "custom":
        if not inst.get("code_file"):
            raise ConfigError("--code custom needs --code-file")
        code, sym = custom_code(inst["code_file"])
    else:
        raise ConfigError(f"unknown code {kind!r}")
    noise_kind = inst.get("noise") or "identity"
    shape = code.physical_shape
    if noise_kind == "erasure":
        noise = erasure_channel(shape)
    elif noise_kind == "identity":
        noise = identity_channel(shape)
    elif noise_kind == "dephasing":
        if inst.get("p") is None:
            raise ConfigError("--noise dephasing needs --p")
        noise = dephasing_channel(float(inst["p"]), shape)
    else:
        raise ConfigError(f"unknown noise {noise_kind!r}")
    return code, sym, noise


def _round(x):
    if isinstance(x, float):
        if not math.isfinite(x):
            return str(x)
        return float(f"{x:.{SIG_DIGITS}g}") + 0.0
    if isinstance(x, dict):
        return {k: _round(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_round(v) for v in x]
    return x


def _inst_params(inst: dict) -> dict:
    return {k: inst.get(k) for k in PARAM_COLUMNS}


def evaluate(inst: dict, opts: dict) -> dict:
    """One instance: report, bound checks and the flat row. Errors are captured."""
    out = {"params": _inst_params(inst), "report": None, "bounds": [], "error": None, "error_kind": None}
    try:
        code, sym, noise = build_instance(inst)
        rep = analyze(code, noise, sym, grid_size=opts["grid"], gamma_grid=opts["gamma_grid"], tol=opts["tol"])
        checks = check_report(rep, opts["slack"])
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as exc:
        # LinAlgError is a ValueError subclass, so this clause must come first
        out["error"], out["error_kind"] = f"{type(exc).__name__}: {exc}", "solver"
        return out
    except (ConfigError, SchemaError, IsometryError, DimensionError, ValueError) as exc:
        out["error"], out["error_kind"] = f"{type(exc).__name__}: {exc}", "config"
        return out
    out["report"] = rep.to_dict()
    out["bounds"] = [b.to_dict() for b in checks]
    return _round(out)


def exact_ok(result: dict) -> bool:
    return all(b["satisfied"] for b in result["bounds"] if b["name"] in EXACT_CHECKS)


def to_row(result: dict) -> dict:
    row = dict(result["params"])
    rep = result["report"] or {}
    for k in MEASURE_COLUMNS:
        row[k] = rep.get(k)
    by_name = {b["name"]: b for b in result["bounds"]}
    for name in BOUND_NAMES:
        b = by_name.get(name)
        vac = b is None or b["vacuous"]
        row[f"{name}_lhs"] = None if vac else b["lhs"]
        row[f"{name}_rhs"] = None if vac else b["rhs"]
        row[f"{name}_ok"] = None if vac else b["satisfied"]
    row["exact_ok"] = None if result["error"] else exact_ok(result)
    row["error"] = result["error"]
    return row


def exit_code(results: list[dict]) -> int:
    kinds = {r["error_kind"] for r in results}
    if "config" in kinds:
        return EXIT_CONFIG
    if "solver" in kinds:
        return EXIT_SOLVER
    if not all(exact_ok(r) for r in results):
        return EXIT_BOUND
    return EXIT_OK


# output

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    return str(v)


def render_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, quoting=csv.QUOTE_MINIMAL, lineterminator="\r\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_csv_cell(r.get(c)) for c in columns])
    return buf.getvalue()


def render_json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config(args) -> dict:
    keep = ("command", "code", "t", "n", "m", "q", "code_file", "noise", "p", "grid", "gamma_grid", "tol",
            "slack", "seed", "format", "which")
    return {k: getattr(args, k) for k in keep if hasattr(args, k)}


# commands

def _opts(args) -> dict:
    return {"grid": args.grid, "gamma_grid": args.gamma_grid, "tol": args.tol, "slack": args.slack}


def _single_point(args) -> dict:
    return {"code": args.code, "t": args.t, "n": args.n, "m": args.m, "q": args.q, "noise": args.noise,
            "p": args.p, "code_file": args.code_file}


def cmd_analyze(args) -> int:
    res = evaluate(_single_point(args), _opts(args))
    if res["error_kind"] == "config":
        print(res["error"], file=sys.stderr)
        return EXIT_CONFIG
    code = exit_code([res])
    if args.format == "csv":
        emit(render_csv([to_row(res)], ROW_COLUMNS), args.output)
    else:
        doc = {"config": _config(args), "version": __version__, **res}
        validate(doc, "report")
        emit(render_json(doc), args.output)
    return code


def _split(text, conv):
    if text is None:
        return [None]
    try:
        vals = [conv(x) for x in str(text).split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError(f"bad list {text!r}: {exc}") from None
    if not vals:
        raise ConfigError(f"empty range {text!r}")
    return vals


def sweep_points(args) -> list[dict]:
    axes = {"t": _split(args.t, int), "n": _split(args.n, int), "m": _split(args.m, int),
            "q": _split(args.q, float), "p": _split(args.p, float)}
    points = []
    for t, n, m, q, p in itertools.product(axes["t"], axes["n"], axes["m"], axes["q"], axes["p"]):
        points.append({"code": args.code, "t": t, "n": n, "m": m, "q": q, "noise": args.noise, "p": p,
                      "code_file": args.code_file})
    return points


def _jobs(args) -> int:
    if args.jobs is not None:
        jobs = args.jobs
    else:
        try:
            jobs = int(os.environ.get("COVQEC_JOBS", "1"))
        except ValueError:
            raise ConfigError("COVQEC_JOBS must be an integer") from None
    if jobs < 1:
        raise ConfigError("--jobs must be at least 1")
    return jobs


def run_all(points: list[dict], opts: dict, jobs: int) -> list[dict]:
    if jobs == 1 or len(points) == 1:
        return [evaluate(s, opts) for s in points]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(evaluate, points, itertools.repeat(opts)))


def cmd_sweep(args) -> int:
    points = sweep_points(args)
    results = run_all(points, _opts(args), _jobs(args))
    rows = [to_row(r) for r in results]
    if args.format == "csv":
        emit(render_csv(rows, ROW_COLUMNS), args.output)
    else:
        doc = {"config": _config(args), "version": __version__, "columns": ROW_COLUMNS, "rows": rows}
        validate(doc, "rows")
        emit(render_json(doc), args.output)
    # per-point failures are recorded in-row and still decide the exit code
    return exit_code(results)


def battery(code_file: str | None = None) -> list[dict]:
    points = [{"code": "rm", "t": 3, "noise": "erasure"}]
    points += [{"code": "thermo", "n": n, "m": 2, "q": q, "noise": "erasure"}
              for n in (8, 10) for q in (0.0, 0.25, 0.5, 0.75, 1.0)]
    points += [{"code": "trivial", "n": 2, "noise": "erasure"}]
    if code_file:
        points.append({"code": "custom", "code_file": code_file, "noise": "erasure"})
    return [{k: s.get(k) for k in PARAM_COLUMNS + ["code_file"]} for s in points]


def _label(params: dict) -> str:
    return ",".join(f"{k}={params[k]}" for k in PARAM_COLUMNS if params.get(k) is not None)


def _check(name, instance, passed, value, gating=True):
    return {"check": name, "instance": instance, "passed": bool(passed), "value": value, "gating": gating}


def identity_checks(inst: dict) -> list[dict]:
    """KL and charge-fluctuation identities at the exact endpoints."""
    code, sym, noise = build_instance(inst)
    label = _label(_inst_params(inst))
    out = []
    if inst["code"] == "rm" or (inst["code"] == "thermo" and inst["q"] == 1.0):
        res = kl_residual(code, noise)
        out.append(_check("knill_laflamme", label, res <= 1e-8, res))
    return out


def qfi_checks(seed: int, count: int = 3) -> list[dict]:
    rng = np.random.default_rng(seed)
    out = []
    for k in range(count):
        h = random_hermitian(int(rng.integers(2, 9)), rng)
        err = abs(unitary_qfi(h) - spectral_range(h) ** 2)
        out.append(_check("unitary_qfi", f"random_hermitian#{k}", err <= 1e-8, err))
    return out


def instance_checks(res: dict, slack: float) -> list[dict]:
    label = _label(res["params"])
    rep = res["report"]
    out = []
    for b in res["bounds"]:
        if b["vacuous"]:
            continue
        gating = b["name"] in EXACT_CHECKS or slack > 0
        out.append(_check(b["name"], label, b["satisfied"], b["residual"], gating))
    p = res["params"]
    if p["code"] == "rm" or (p["code"] == "thermo" and p["q"] == 1.0):
        out.append(_check("exact_epsilon", label, rep["epsilon"] <= 1e-6, rep["epsilon"]))
        out.append(_check("exact_chi", label, abs(rep["chi"]) <= 1e-6, rep["chi"]))
    if p["code"] == "thermo" and p["q"] == 0.0:
        out.append(_check("covariant_delta_group", label, rep["delta_group"] <= 1e-8, rep["delta_group"]))
        out.append(_check("covariant_chi", label, abs(rep["chi"] - rep["delta_h_logical"]) <= 1e-6, rep["chi"]))
    return out


def cmd_verify(args) -> int:
    points = battery(args.code_file)
    if args.code_file:
        # validate the injected instance before spending time on the battery
        try:
            custom_code(args.code_file)
        except (SchemaError, IsometryError, DimensionError, ValueError, OSError) as exc:
            print(f"invalid code file: {type(exc).__name__}: {exc}", file=sys.stderr)
            return EXIT_CONFIG
    opts = _opts(args)
    results = run_all(points, opts, _jobs(args))
    if any(r["error_kind"] == "config" for r in results):
        for r in results:
            if r["error"]:
                print(r["error"], file=sys.stderr)
        return EXIT_CONFIG
    checks = []
    for inst, res in zip(points, results):
        if res["error"]:
            checks.append(_check("evaluation", _label(res["params"]), False, res["error"]))
            continue
        checks.extend(instance_checks(res, args.slack))
        checks.extend(identity_checks(inst))
    checks.extend(qfi_checks(args.seed))
    checks = _round(checks)
    failed = [c for c in checks if c["gating"] and not c["passed"]]
    if args.format == "csv":
        emit(render_csv(checks, ["check", "instance", "passed", "gating", "value"]), args.output)
    else:
        doc = {"config": _config(args), "version": __version__, "checks": checks,
               "instances": [to_row(r) for r in results],
               "summary": {"total": len(checks), "failed": len(failed), "passed": not failed}}
        emit(render_json(doc), args.output)
    for c in failed:
        print(f"FAIL {c['check']} [{c['instance']}] value={c['value']}", file=sys.stderr)
    if any(r["error_kind"] == "solver" for r in results):
        return EXIT_SOLVER
    return EXIT_BOUND if failed else EXIT_OK


def cmd_dump_sdp(args) -> int:
    code, sym, noise = build_instance(_single_point(args))
    prob = build_problem(args.which, sym.h_physical, noise)
    doc = prob.to_dict()
    validate(doc, "sdp")
    emit(render_json(_round(doc)), args.output)
    return EXIT_OK


# parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _positive(conv):
    def f(text):
        v = conv(text)
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return f


def _add_instance_args(p, lists: bool = False):
    num = str if lists else None
    p.add_argument("--code", choices=["rm", "thermo", "trivial", "custom"], required=True)
    p.add_argument("--t", type=num or int, help="Reed-Muller order (3 or 4)")
    p.add_argument("--n", type=num or int, help="number of qubits")
    p.add_argument("--m", type=num or int, help="thermodynamic logical charge separation")
    p.add_argument("--q", type=num or float, help="thermodynamic interpolation parameter")
    p.add_argument("--code-file", help="JSON code descriptor (with --code custom)")
    p.add_argument("--noise", choices=["erasure", "dephasing", "identity"], default="identity")
    p.add_argument("--p", type=num or float, help="dephasing probability")


def _add_common(p):
    p.add_argument("--grid", type=_positive(int), default=DEFAULT_GRID, help="theta grid for delta_G")
    p.add_argument("--gamma-grid", type=_positive(int), default=8, help="theta grid for the gate-error lower bound")
    p.add_argument("--tol", type=_positive(float), default=1e-6, help="recovery cutting-plane tolerance")
    p.add_argument("--slack", type=float, default=DEFAULT_SLACK, help="quadratic slack c for the asymptotic bounds")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--output", "-o", help="output path (default stdout)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, help="parallel workers (default $COVQEC_JOBS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="covqec", description="Approximate covariance and QEC measures for quantum codes.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("analyze", help="all measures and bound checks for one instance")
    _add_instance_args(p)
    _add_common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("sweep", help="comma-separated parameter ranges, one row per point")
    _add_instance_args(p, lists=True)
    _add_common(p)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="run the built-in instance battery")
    p.add_argument("--code-file", help="extra custom code (erasure noise) added to the battery")
    _add_common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("dump-sdp", help="write the j_min or f_reg program as JSON")
    _add_instance_args(p)
    p.add_argument("--which", choices=["j_min", "f_reg"], required=True)
    p.add_argument("--output", "-o")
    p.set_defaults(func=cmd_dump_sdp)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if getattr(args, "slack", 0.0) < 0:
        print("--slack must be non-negative", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (SolverError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (ConfigError, SchemaError, IsometryError, DimensionError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
