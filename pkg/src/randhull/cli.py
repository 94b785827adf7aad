"""Command-line interface.

Subcommands: hull, fvector, classify, sample, cap, stabilize, experiment,
report.  Every run writes ``manifest.json`` (resolved configuration, master
seed, version) into the output directory, so outputs are reproducible from
the manifest alone.

Exit codes: 0 success; 2 usage error; 3 configuration error; 4 unreadable or
malformed input file; 5 degenerate input (general-position violation);
6 packing capacity error; 7 insufficient data for a fit.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import __version__
from .body import (Ball, CapacityError, Ellipsoid, cap_area,
                   cap_from_direction)
from .combinatorics import classify_d_plus_2, type_f_count
from .experiments import (ConfigError, ExperimentConfig, ReplicationRecord,
                          ReplicationTable, body_label, cell_file_name,
                          run_binomial, run_poisson, summarize,
                          write_replication_csvs)
from .geometry import GeneralPositionError
from .hull import (dehn_sommerville_check, euler_check, f_vector,
                   facet_dump_lines, incremental_hull)
from .rng import Stream, derive_seed
from .stabilization import InsufficientDataError, radius_tail_experiment
from .body import sample_surface

DEFAULT_SEED = 0x243F6A8885A308D3

_EPILOG = """exit codes:
  0  success
  2  usage error
  3  configuration error
  4  unreadable or malformed input file
  5  degenerate input (general-position violation)
  6  capacity error (cap packing)
  7  insufficient data (empty fit window)
"""


class PointFileError(ValueError):
    pass


def _parse_seed(text: str) -> int:
    try:
        return int(text, 0)
    except ValueError:
        try:
            return int(text, 16)
        except ValueError:
            raise ConfigError(f"cannot parse seed {text!r}") from None


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p != ""]
    except ValueError:
        raise ConfigError(f"cannot parse float list {text!r}") from None


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p != ""]
    except ValueError:
        raise ConfigError(f"cannot parse integer list {text!r}") from None


def _load_points(path: str) -> np.ndarray:
    try:
        with open(path) as fh:
            rows = []
            for line_no, line in enumerate(fh, start=1):
                parts = line.split()
                if not parts:
                    continue
                try:
                    rows.append([float(p) for p in parts])
                except ValueError:
                    raise PointFileError(
                        f"{path}:{line_no}: malformed coordinates")
    except OSError as exc:
        raise PointFileError(f"cannot read {path}: {exc}") from None
    if not rows:
        raise PointFileError(f"{path}: no points")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise PointFileError(f"{path}: inconsistent row widths")
    return np.asarray(rows, dtype=float)


def _resolve_body(cfg: dict) -> Ball | Ellipsoid:
    spec = cfg.get("body") or {}
    kind = spec.get("kind", "ball")
    d = cfg.get("dim")
    if kind == "ball":
        if d is None:
            raise ConfigError("ball body needs 'dim'")
        center = spec.get("center") or [0.0] * d
        return Ball(d, float(spec.get("radius", 1.0)), tuple(center))
    if kind == "ellipsoid":
        axes = spec.get("semi_axes")
        if not axes:
            raise ConfigError("ellipsoid body needs 'semi_axes'")
        if d is not None and d != len(axes):
            raise ConfigError("'dim' contradicts the number of semi-axes")
        return Ellipsoid(tuple(axes))
    raise ConfigError(f"unknown body kind {kind!r}")


def _body_cfg(body) -> dict:
    if isinstance(body, Ball):
        return {"kind": "ball", "radius": body.radius,
                "center": list(body.center)}
    return {"kind": "ellipsoid", "semi_axes": list(body.semi_axes)}


def _write_manifest(outdir: str, subcommand: str, config: dict, seed: int):
    os.makedirs(outdir, exist_ok=True)
    doc = {"artifact": "randhull", "version": __version__,
           "subcommand": subcommand, "seed": f"{seed:016x}",
           "config": config}
    with open(os.path.join(outdir, "manifest.json"), "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _write_json(path: str, doc):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# Subcommand handlers.
# ---------------------------------------------------------------------------

def _cmd_hull(args) -> int:
    pts = _load_points(args.points)
    h = incremental_hull(pts)
    fv = f_vector(h)
    _write_manifest(args.out, "hull",
                    {"points": os.path.abspath(args.points)}, 0)
    with open(os.path.join(args.out, "facets.txt"), "w") as fh:
        fh.write("\n".join(facet_dump_lines(h)) + "\n")
    with open(os.path.join(args.out, "fvector.txt"), "w") as fh:
        fh.write(" ".join(str(c) for c in fv) + "\n")
    print(" ".join(str(c) for c in fv))
    return 0


def _cmd_fvector(args) -> int:
    pts = _load_points(args.points)
    h = incremental_hull(pts)
    fv = f_vector(h)
    d = pts.shape[1]
    _write_manifest(args.out, "fvector",
                    {"points": os.path.abspath(args.points)}, 0)
    with open(os.path.join(args.out, "fvector.txt"), "w") as fh:
        fh.write(" ".join(str(c) for c in fv) + "\n")
    print(" ".join(str(c) for c in fv))
    print(f"euler={euler_check(fv, d)} dehn_sommerville={dehn_sommerville_check(fv, d)}")
    return 0


def _cmd_classify(args) -> int:
    pts = _load_points(args.points)
    d = pts.shape[1]
    label = classify_d_plus_2(pts)
    h = incremental_hull(pts)
    fv = f_vector(h)
    formula = (d + 2,) + tuple(type_f_count(d, label.j, k)
                               for k in range(1, d))
    _write_manifest(args.out, "classify",
                    {"points": os.path.abspath(args.points)}, 0)
    print(str(label))
    print("formula_f " + " ".join(str(c) for c in formula))
    print("hull_f    " + " ".join(str(c) for c in fv))
    return 0


def _cmd_sample(args) -> int:
    cfg = {"dim": args.dim, "body": _body_spec_from_args(args)}
    body = _resolve_body(cfg)
    seed = _parse_seed(args.seed)
    stream = Stream(derive_seed(seed, 0x5A3B1E))
    pts = sample_surface(body, stream, args.n)
    _write_manifest(args.out, "sample",
                    {"body": _body_cfg(body), "dim": body.dimension,
                     "n": args.n}, seed)
    path = os.path.join(args.out, "points.txt")
    with open(path, "w") as fh:
        for row in pts:
            fh.write(" ".join(format(c, ".17g") for c in row) + "\n")
    print(path)
    return 0


def _cmd_cap(args) -> int:
    cfg = {"dim": args.dim, "body": _body_spec_from_args(args)}
    body = _resolve_body(cfg)
    seed = _parse_seed(args.seed)
    u = np.asarray(_parse_floats(args.direction))
    nrm = np.linalg.norm(u)
    if nrm == 0:
        raise ConfigError("direction must be nonzero")
    cap = cap_from_direction(body, u / nrm, args.height)
    est = cap_area(body, cap, n_samples=args.samples,
                   stream=Stream(derive_seed(seed, 0xCA9)))
    _write_manifest(args.out, "cap",
                    {"body": _body_cfg(body), "dim": body.dimension,
                     "direction": list(map(float, u / nrm)),
                     "height": args.height, "samples": args.samples}, seed)
    print(f"{est.value:.12g} {est.stderr:.6g}")
    return 0


def _cmd_stabilize(args) -> int:
    cfg = {"dim": args.dim, "body": _body_spec_from_args(args)}
    body = _resolve_body(cfg)
    seed = _parse_seed(args.seed)
    r_grid = np.asarray(_parse_floats(args.r_grid)) if args.r_grid else None
    result = radius_tail_experiment(body, args.n, r_grid, args.reps, seed)
    _write_manifest(args.out, "stabilize",
                    {"body": _body_cfg(body), "dim": body.dimension,
                     "n": args.n, "reps": args.reps,
                     "r_grid": [float(r) for r in result.r_grid]}, seed)
    with open(os.path.join(args.out, "tail.csv"), "w") as fh:
        fh.write("r,n,survival,stderr\n")
        for r, s, e in zip(result.r_grid, result.survival, result.stderr):
            fh.write(f"{r:.17g},{args.n},{s:.17g},{e:.17g}\n")
    _write_json(os.path.join(args.out, "fit.json"),
                {"slope": result.slope, "intercept": result.intercept,
                 "r_squared": result.r_squared})
    print(f"slope={result.slope:.6g} r_squared={result.r_squared:.4f}")
    return 0


def _body_spec_from_args(args) -> dict:
    spec: dict = {"kind": args.body}
    if getattr(args, "radius", None) is not None:
        spec["radius"] = args.radius
    if getattr(args, "center", None):
        spec["center"] = _parse_floats(args.center)
    if getattr(args, "axes", None):
        spec["semi_axes"] = _parse_floats(args.axes)
    return spec


def _resolve_experiment_config(args) -> tuple[ExperimentConfig, dict, int]:
    cfg: dict = {}
    if args.config:
        try:
            with open(args.config) as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise PointFileError(f"cannot read {args.config}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed config {args.config}: {exc}") from None
    if args.body:
        cfg["body"] = _body_spec_from_args(args)
    if args.dim is not None:
        cfg["dim"] = args.dim
    if args.n:
        cfg["model"] = cfg.get("model", "binomial")
        cfg["n"] = _parse_ints(args.n)
    if args.t:
        cfg["model"] = "poisson"
        cfg["t"] = _parse_floats(args.t)
    if args.model:
        cfg["model"] = args.model
    if args.reps is not None:
        cfg["reps"] = args.reps
    if args.k:
        cfg["k"] = _parse_ints(args.k)
    if args.seed is not None:
        cfg["seed"] = args.seed
    if args.threads is not None:
        cfg["threads"] = args.threads

    body = _resolve_body(cfg)
    d = body.dimension
    model = cfg.get("model", "binomial")
    cells = cfg.get("n") if model == "binomial" else cfg.get("t")
    if not cells:
        raise ConfigError(f"model {model!r} needs a cell grid "
                          f"({'n' if model == 'binomial' else 't'})")
    k_list = tuple(cfg.get("k", [d - 1]))
    reps = cfg.get("reps")
    if reps is None:
        raise ConfigError("missing replication count 'reps'")
    seed_raw = cfg.get("seed", DEFAULT_SEED)
    seed = _parse_seed(seed_raw) if isinstance(seed_raw, str) else int(seed_raw)
    config = ExperimentConfig(body=body, dimension=d, k_list=k_list,
                              model=model, cells=tuple(cells),
                              replications=int(reps), master_seed=seed)
    threads = int(cfg.get("threads", 1))
    resolved = {"body": _body_cfg(body), "dim": d, "model": model,
                ("n" if model == "binomial" else "t"): list(cells),
                "k": list(k_list), "reps": int(reps),
                "seed": f"{seed:016x}", "threads": threads}
    return config, resolved, threads


def _cmd_experiment(args) -> int:
    config, resolved, threads = _resolve_experiment_config(args)
    runner = run_binomial if config.model == "binomial" else run_poisson
    table = runner(config, threads=threads)
    _write_manifest(args.out, "experiment", resolved, config.master_seed)
    paths = write_replication_csvs(table, args.out)
    for p in paths:
        print(p)
    return 0


def _read_table(indir: str) -> tuple[ReplicationTable, dict]:
    manifest_path = os.path.join(indir, "manifest.json")
    try:
        with open(manifest_path) as fh:
            manifest = json.load(fh)
    except OSError as exc:
        raise PointFileError(f"cannot read {manifest_path}: {exc}") from None
    cfg = manifest["config"]
    body = _resolve_body(cfg)
    model = cfg["model"]
    cells = tuple(cfg["n" if model == "binomial" else "t"])
    d = body.dimension
    records: dict = {}
    for cell in cells:
        path = os.path.join(indir, cell_file_name(model, cell))
        recs = []
        try:
            with open(path) as fh:
                header = fh.readline()
                if not header.startswith("rep,seed,n,degenerate"):
                    raise PointFileError(f"{path}: unexpected header")
                for line in fh:
                    parts = line.strip().split(",")
                    rep, seed = int(parts[0]), int(parts[1], 16)
                    realized, degen = int(parts[2]), parts[3] == "1"
                    fv = tuple(int(v) for v in parts[4:4 + d])
                    recs.append(ReplicationRecord(
                        rep, seed, realized, degen, None if degen else fv))
        except OSError as exc:
            raise PointFileError(f"cannot read {path}: {exc}") from None
        records[cell] = recs
    table = ReplicationTable(model, body, d, cells,
                             _parse_seed(manifest["seed"]), records)
    return table, cfg


def _cmd_report(args) -> int:
    table, cfg = _read_table(args.input)
    outdir = args.out or args.input
    os.makedirs(outdir, exist_ok=True)
    k_list = cfg.get("k", [table.dimension - 1])
    docs = []
    for k in k_list:
        stats = summarize(table, k)
        docs.extend(s.as_dict() for s in stats)
        figures = (
            ("mean", [(s.mean, math.sqrt(s.var / s.m_effective)) for s in stats]),
            ("var", [(s.var, 0.5 * (s.var_ci_hi - s.var_ci_lo)) for s in stats]),
            ("ks", [(s.ks, 1.0 / math.sqrt(s.m_effective)) for s in stats]))
        for figure, values in figures:
            path = os.path.join(outdir, f"plot_{figure}_k{k}.csv")
            with open(path, "w") as fh:
                fh.write("x,y,stderr\n")
                for s, (y, err) in zip(stats, values):
                    fh.write(f"{s.cell:.17g},{y:.17g},{err:.17g}\n")
    _write_json(os.path.join(outdir, "summary.json"), docs)
    print(os.path.join(outdir, "summary.json"))
    return 0


# ---------------------------------------------------------------------------
# Parser.
# ---------------------------------------------------------------------------

def _add_body_flags(p: argparse.ArgumentParser, default_kind="ball"):
    p.add_argument("--body", choices=["ball", "ellipsoid"], default=default_kind)
    p.add_argument("--dim", type=int, default=None, help="ambient dimension")
    p.add_argument("--radius", type=float, default=None)
    p.add_argument("--center", default=None, help="comma-separated center")
    p.add_argument("--axes", default=None, help="comma-separated semi-axes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="randhull",
        description="Random boundary hulls: face statistics, combinatorial "
                    "types, stabilization radii, Monte Carlo experiments.",
        epilog=_EPILOG,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("hull", help="hull of a point file: facet dump + f-vector")
    p.add_argument("--points", required=True)
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("fvector", help="f-vector and identity checks")
    p.add_argument("--points", required=True)
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("classify", help="combinatorial type of d+2 points")
    p.add_argument("--points", required=True)
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("sample", help="uniform boundary samples")
    _add_body_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", default=f"{DEFAULT_SEED:#x}")
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("cap", help="cap surface area with uncertainty")
    _add_body_flags(p)
    p.add_argument("--direction", required=True, help="comma-separated direction")
    p.add_argument("--height", type=float, required=True)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seed", default=f"{DEFAULT_SEED:#x}")
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("stabilize", help="stabilization-radius tail experiment")
    _add_body_flags(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--r-grid", dest="r_grid", default=None)
    p.add_argument("--seed", default=f"{DEFAULT_SEED:#x}")
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("experiment", help="binomial/Poisson replication runs")
    p.add_argument("--config", default=None, help="JSON config path")
    _add_body_flags(p, default_kind=None)
    p.add_argument("--model", choices=["binomial", "poisson"], default=None)
    p.add_argument("--n", default=None, help="comma-separated n grid")
    p.add_argument("--t", default=None, help="comma-separated t grid")
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--k", default=None, help="comma-separated face dimensions")
    p.add_argument("--seed", default=None)
    p.add_argument("--threads", type=int, default=None,
                   help="worker processes (affects speed only, never results)")
    p.add_argument("--out", default="randhull-out")

    p = sub.add_parser("report", help="summaries and plot CSVs from a run directory")
    p.add_argument("--input", required=True)
    p.add_argument("--out", default=None)
    return parser


_HANDLERS = {
    "hull": _cmd_hull,
    "fvector": _cmd_fvector,
    "classify": _cmd_classify,
    "sample": _cmd_sample,
    "cap": _cmd_cap,
    "stabilize": _cmd_stabilize,
    "experiment": _cmd_experiment,
    "report": _cmd_report,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.subcommand](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3
    except PointFileError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 4
    except GeneralPositionError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return 5
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 6
    except InsufficientDataError as exc:
        print(f"insufficient data: {exc}", file=sys.stderr)
        return 7
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
