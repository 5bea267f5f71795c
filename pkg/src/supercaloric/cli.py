"""Command-line front end.

Every subcommand prints a JSON document (or CSV for ``eval``) on standard
output and optionally writes bulk tables to the paths named in its config.
Exit codes: 0 success, 2 invalid input or config, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from .closed_form import FAMILY_KINDS, make_family, write_eval_csv
from .errors import InvalidInput, LabError, NumericalFailure
from .exponents import Medium, exponent_table, moser_sequence
from .grid_solver import GridField, RadialGrid, SolverConfig, solve, traces_from
from .harnack import (
    HarnackProbe,
    constant_sweep,
    l1_harnack_probe,
    pointwise_rate_detect,
    self_similar_probes,
    weak_harnack_probe,
)
from .integrability import Cylinder, classify, exponent_scan, scan_at
from .obstacle import ObstacleProblem, solve_obstacle
from .sources import ConstantField, Shifted, Truncated

EXIT_OK, EXIT_INVALID, EXIT_NUMERIC = 0, 2, 3


class ConfigError(InvalidInput):
    pass


def _clean(obj):
    """JSON-safe copy: non-finite floats become strings, numpy scalars become Python."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False)


def _emit(obj, out=None):
    (out or sys.stdout).write(dumps(obj) + "\n")


def _load_config(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc


def _need(cfg, key, where="config"):
    if key not in cfg:
        raise ConfigError(f"{where} is missing '{key}'")
    return cfg[key]


def _medium(cfg) -> Medium:
    return Medium(_need(cfg, "n"), _need(cfg, "p"))


def _source(spec, medium: Medium):
    """Build a source from ``{"family": ...}``, ``{"constant": K}`` or ``{"field": path}``."""
    if "family" in spec:
        src = make_family(spec["family"], medium, c=spec.get("c"), q=spec.get("q"),
                          zero_extended=bool(spec.get("zero_extended", False)))
    elif "constant" in spec:
        src = ConstantField(float(spec["constant"]), medium.n, medium.p)
    elif "field" in spec:
        try:
            src = GridField.load(spec["field"], spec.get("json"))
        except OSError as exc:
            raise ConfigError(f"cannot read field: {exc}") from exc
    else:
        raise ConfigError("source needs one of 'family', 'constant' or 'field'")
    if "truncate" in spec:
        src = Truncated(src, float(spec["truncate"]))
    if "shift" in spec:
        src = Shifted(src, float(spec["shift"]))
    return src


def _grid(cfg, medium) -> RadialGrid:
    spec = dict(_need(cfg, "grid"))
    spec.setdefault("n", medium.n)
    if spec["n"] != medium.n:
        raise ConfigError("grid dimension differs from the medium")
    return RadialGrid.from_spec(spec)


def _times(cfg):
    spec = _need(cfg, "times")
    if isinstance(spec, list):
        return np.asarray(spec, dtype=float)
    return np.linspace(float(_need(spec, "t0", "times")), float(_need(spec, "t1", "times")),
                       int(_need(spec, "K", "times")) + 1)


def _solver(cfg) -> SolverConfig:
    return SolverConfig(**cfg.get("solver", {}))


def _cylinder(spec) -> Cylinder:
    return Cylinder(float(spec.get("x0_radius", 0.0)), float(_need(spec, "r", "cylinder")),
                    float(_need(spec, "t1", "cylinder")), float(_need(spec, "t2", "cylinder")))


# ---------------------------------------------------------------------------
# subcommands


def cmd_exponents(args):
    medium = Medium(args.n, args.p)
    _emit({**exponent_table(medium).as_dict(), "regime": medium.regime.value})


def cmd_moser(args):
    trace = moser_sequence(Medium(args.n, args.p), args.s0, args.cap)
    _emit(trace.as_dict())


def _read_points(path):
    try:
        with open(path) as fh:
            rows = [row for row in csv.reader(fh) if row and not row[0].lstrip().startswith("#")]
    except OSError as exc:
        raise ConfigError(f"cannot read points: {exc}") from exc
    points = []
    for row in rows:
        try:
            points.append((float(row[0]), float(row[1])))
        except (ValueError, IndexError):
            if points:
                raise ConfigError(f"bad points row {row!r}")
    return points


def cmd_eval(args):
    family = make_family(args.family, Medium(args.n, args.p), c=args.c, q=args.q, zero_extended=args.zero_extend)
    points = _read_points(args.points)
    if args.out:
        with open(args.out, "w") as fh:
            write_eval_csv(family, points, fh)
    else:
        write_eval_csv(family, points, sys.stdout)


def cmd_solve(args):
    cfg = _load_config(args.config)
    medium = _medium(cfg)
    grid, times = _grid(cfg, medium), _times(cfg)
    data = _need(cfg, "data")
    if "family" in data or "constant" in data:
        initial, outer, inner = traces_from(_source(data, medium), grid, times)
    else:
        initial, outer, inner = _need(data, "initial", "data"), _need(data, "outer", "data"), data.get("inner")
    field = solve(medium, grid, times, initial, outer, inner, _solver(cfg))
    out = cfg.get("output", {})
    if "csv" in out:
        field.save(out["csv"], out.get("json"))
    _emit({"delta": field.meta["delta"], "picard_iterations_max": max(field.meta["picard_iterations"]),
           "max_value": float(field.values.max()), "min_value": float(field.values.min()),
           "output": out})


def _bump(spec, grid, times):
    height = float(spec.get("height", 1.0))
    radius = float(spec.get("radius", 0.5))
    center = float(spec.get("center", 0.0))
    prof = height * np.clip(1.0 - ((grid.nodes - center) / radius) ** 2, 0.0, None) ** 2
    return np.tile(prof, (times.size, 1))


def cmd_obstacle(args):
    cfg = _load_config(args.config)
    medium = _medium(cfg)
    grid, times = _grid(cfg, medium), _times(cfg)
    ob = _need(cfg, "obstacle")
    if "bump" in ob:
        psi = GridField(grid, times, _bump(ob["bump"], grid, times), medium.p)
    elif "field" in ob:
        psi = _source(ob, medium)
    else:
        src = _source(ob, medium)
        rr, tt = np.meshgrid(grid.nodes, times)
        psi = GridField(grid, times, src.value(rr, tt), medium.p)
    problem = ObstacleProblem(psi, _solver(cfg), cfg.get("boundary"), cfg.get("method", "active_set"))
    sol = solve_obstacle(problem)
    out = cfg.get("output", {})
    if "csv" in out:
        sol.u.save(out["csv"], out.get("json"))
    if "contact_csv" in out:
        with open(out["contact_csv"], "w") as fh:
            sol.write_contact_csv(fh)
    if "summary" in out:
        with open(out["summary"], "w") as fh:
            fh.write(dumps(sol.summary()) + "\n")
    _emit({**sol.summary(), "max_sweeps": max(sol.sweeps), "output": out})


def cmd_scan(args):
    cfg = _load_config(args.config)
    medium = _medium(cfg)
    src = _source(_need(cfg, "source"), medium)
    cyl = _cylinder(_need(cfg, "cylinder"))
    selector = cfg.get("selector", "value")
    levels = int(cfg.get("levels", 40))
    out = cfg.get("output", {})
    if "q" in cfg:
        scan = scan_at(src, cyl, float(cfg["q"]), selector, levels)
        result = {"q": scan.q, "verdict": scan.verdict.value, "ratio": scan.ratio, "slope": scan.slope,
                  "values": list(scan.values)}
        rows = list(scan.rows())
    else:
        res = exponent_scan(src, cyl, selector, float(cfg.get("q_lo", 0.1)), float(cfg.get("q_hi", 2.0)), levels)
        result = res.as_dict()
        rows = [row for s in res.scans for row in s.rows()]
    if "csv" in out:
        with open(out["csv"], "w") as fh:
            fh.write("q,rho,I,verdict\n")
            for q, rho, val, verdict in rows:
                fh.write(f"{q:.17g},{rho:.17g},{val:.17g},{verdict}\n")
    _emit(result)


def cmd_classify(args):
    medium = Medium(args.n, args.p) if args.family else None
    if args.family:
        src = make_family(args.family, medium, c=args.c, q=args.q, zero_extended=args.zero_extend)
    else:
        try:
            src = GridField.load(args.field, args.json)
        except OSError as exc:
            raise ConfigError(f"cannot read field: {exc}") from exc
    region = None
    if args.r is not None:
        if args.t1 is None or args.t2 is None:
            raise ConfigError("--r needs --t1 and --t2")
        region = Cylinder(args.x0, args.r, args.t1, args.t2)
    report = classify(src, region, args.s, args.shift)
    _emit(report.as_dict())


def _probe(spec):
    return HarnackProbe(float(spec.get("x0_radius", 0.0)), float(_need(spec, "r", "probe")),
                        float(_need(spec, "s", "probe")), float(spec.get("c2_trial", 0.1)))


def cmd_harnack(args):
    cfg = _load_config(args.config)
    medium = _medium(cfg)
    src = _source(_need(cfg, "source"), medium)
    mode = cfg.get("mode", "weak")
    out = cfg.get("output", {})
    if mode == "weak":
        _emit(weak_harnack_probe(src, _probe(_need(cfg, "probe"))).as_dict())
    elif mode == "sweep":
        if "self_similar" in cfg:
            ss = cfg["self_similar"]
            probes = self_similar_probes(medium, float(ss.get("r", 0.25)), float(ss.get("s", 1.0)),
                                         int(ss.get("scales", 5)), float(ss.get("c2_trial", 0.1)),
                                         float(ss.get("x0_radius", 0.0)))
        else:
            probes = [_probe(p) for p in _need(cfg, "probes")]
        rep = constant_sweep(src, probes)
        if "csv" in out:
            with open(out["csv"], "w") as fh:
                rep.write_csv(fh)
        _emit(rep.as_dict())
    elif mode == "l1":
        _emit(l1_harnack_probe(src, float(cfg.get("x0_radius", 0.0)), float(_need(cfg, "r")),
                               float(_need(cfg, "s")), float(_need(cfg, "t"))))
    elif mode == "rate":
        rep = pointwise_rate_detect(src, float(cfg.get("x0_radius", 0.0)), float(_need(cfg, "s")),
                                    cfg.get("t0"), r0=float(cfg.get("r0", 0.5)))
        _emit(rep.as_dict())
    else:
        raise ConfigError(f"unknown harnack mode {mode!r}")


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supercaloric", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exponents", help="regime and critical exponents")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.set_defaults(func=cmd_exponents)

    p = sub.add_parser("moser", help="Moser exponent ladder")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--s0", type=float, required=True)
    p.add_argument("--cap", type=int, default=64)
    p.set_defaults(func=cmd_moser)

    p = sub.add_parser("eval", help="evaluate a closed-form family at points from a CSV file")
    _family_args(p, required=True)
    p.add_argument("--points", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    for name, func, text in (
        ("solve", cmd_solve, "march the equation on a radial grid"),
        ("obstacle", cmd_obstacle, "solve a discrete obstacle problem"),
        ("scan", cmd_scan, "integrability scan / critical exponent"),
        ("harnack", cmd_harnack, "Harnack probes and the pointwise rate"),
    ):
        p = sub.add_parser(name, help=text)
        p.add_argument("--config", required=True)
        p.set_defaults(func=func)

    p = sub.add_parser("classify", help="Barenblatt-class versus complementary-class verdict")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--family", choices=FAMILY_KINDS)
    src.add_argument("--field")
    _family_args(p, required=False, with_family=False)
    p.add_argument("--json", help="sidecar JSON of --field (defaults to the CSV name with .json)")
    p.add_argument("--shift", action="store_true", help="shift by max(0, -inf u) + 1 first")
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--r", type=float)
    p.add_argument("--t1", type=float)
    p.add_argument("--t2", type=float)
    p.add_argument("--s", type=float, help="base time of the rate probe")
    p.set_defaults(func=cmd_classify)
    return parser


def _family_args(p, required, with_family=True):
    if with_family:
        p.add_argument("--family", choices=FAMILY_KINDS, required=True)
    p.add_argument("--n", type=int, required=required)
    p.add_argument("--p", type=float, required=required)
    p.add_argument("--q", type=float)
    p.add_argument("--c", type=float)
    p.add_argument("--zero-extend", action="store_true")


def run_command(argv) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if args.command == "classify" and args.family and (args.n is None or args.p is None):
        sys.stderr.write("error: classify --family needs --n and --p\n")
        return EXIT_INVALID
    try:
        args.func(args)
    except NumericalFailure as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except (LabError, ValueError, TypeError, KeyError) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return EXIT_INVALID
    return EXIT_OK


def main(argv=None) -> int:
    return run_command(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
