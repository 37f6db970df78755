"""Experiment driver.

Subcommands: sample-snake, sample-quad, csbp, merge-ppp, gff, analyze,
acceptance.  Stochastic commands require --seed; there is no implicit
seeding.  Every output file gets a sibling ``<file>.manifest.json``.  A
--config file holds flat ``key = value`` lines; explicit flags win.  Exit
codes: 0 success, 1 validation failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .csbp import LawCheck, csbp_marginals, sample_merge_ppp, u_t
from .gaussian import sample_excursion, sample_snake_labels
from .geodesics import (frame_box_dimension, star_census,
                        strong_confluence_statistic)
from .gff import (DEFAULT_GAMMA, gff_geodesic_bundle, overlay_csv,
                  overlay_multiplicity, overlay_svg, sample_dgff)
from .manifest import RunManifest
from .planar_map import bfs_metric, cvs_construct, sample_labeled_tree
from .rng import RngStream
from .snake_map import quotient_metric
from .spaces import space_from_quad

__all__ = ["run", "main"]


# ---------------------------------------------------------------------------
# configuration plumbing

def _parse_config(path: str) -> dict[str, str]:
    conf = {}
    with open(path, "r", encoding="utf-8") as fp:
        for lineno, raw in enumerate(fp, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, val = (s.strip() for s in line.split("=", 1))
            conf[key.replace("-", "_")] = val
    return conf


class _Cmd:
    """One subcommand: a typed option schema plus its action."""

    def __init__(self, name, options, action, stochastic=True, help=""):
        self.name = name
        self.options = options  # dest -> (type, default, required, help)
        self.action = action
        self.stochastic = stochastic
        self.help = help

    def add_parser(self, sub):
        p = sub.add_parser(self.name, help=self.help)
        for dest, (typ, _default, _required, helptext) in self.options.items():
            flag = "--" + dest.replace("_", "-")
            if typ is bool:
                p.add_argument(flag, dest=dest, action="store_const", const=True,
                               default=None, help=helptext)
            else:
                p.add_argument(flag, dest=dest, type=typ, default=None,
                               help=helptext)
        p.add_argument("--config", type=str, default=None,
                       help="flat key=value config file; flags override")
        return p

    def finalize(self, ns, parser) -> dict:
        conf = {}
        if ns.config:
            raw = _parse_config(ns.config)
            unknown = set(raw) - set(self.options)
            if unknown:
                parser.error(f"unknown config keys: {sorted(unknown)}")
            for key, val in raw.items():
                typ = self.options[key][0]
                try:
                    conf[key] = (val.lower() in ("1", "true", "yes")) \
                        if typ is bool else typ(val)
                except ValueError:
                    parser.error(f"config key {key}: cannot parse {val!r}")
        merged = {}
        for dest, (_typ, default, required, _h) in self.options.items():
            val = getattr(ns, dest)
            if val is None:
                val = conf.get(dest, default)
            if val is None and required:
                parser.error(f"missing required option --{dest.replace('_', '-')}")
            merged[dest] = val
        return merged


def _out_path(name: str | None, default: str) -> str:
    base = name or default
    if os.path.isabs(base):
        return base
    root = os.environ.get("BML_DATA_DIR", ".")
    os.makedirs(root, exist_ok=True)
    return os.path.join(root, base)


def _manifest_for(command: str, params: dict) -> RunManifest:
    clean = {k: v for k, v in params.items() if k != "seed"}
    return RunManifest(command=command, parameters=clean,
                       seed=int(params.get("seed", -1)),
                       code_version=__version__)


def _finish(manifest: RunManifest, outputs: dict[str, str]) -> None:
    manifest.finish(outputs)
    first = next(iter(outputs.values()))
    manifest.write(first + ".manifest.json")


def _write_records(path: str, records, fmt: str = "json") -> None:
    with open(path, "w", encoding="utf-8") as fp:
        if fmt == "csv":
            records = list(records)
            if records:
                cols = sorted({k for r in records for k in r})
                fp.write(",".join(cols) + "\n")
                for r in records:
                    fp.write(",".join("" if r.get(c) is None else str(r.get(c))
                                      for c in cols) + "\n")
        else:
            for r in records:
                fp.write(json.dumps(r, sort_keys=True) + "\n")
                fp.flush()


# ---------------------------------------------------------------------------
# subcommand actions

def _do_sample_snake(p: dict) -> dict[str, str]:
    rng = RngStream(p["seed"]).named("sample-snake")
    exc = sample_excursion(p["n"], p["length"], rng.named("excursion"))
    snake = sample_snake_labels(exc, rng.named("labels"))
    outputs = {}
    bm = quotient_metric(snake, size_cap=p["size_cap"])
    bm.seed_info.update({"seed": p["seed"], "grid_size": p["n"]})
    out = _out_path(p["out"], "snake_map.bin")
    with open(out, "wb") as fp:
        bm.dump_binary(fp)
    outputs["map"] = out
    if p["csv"]:
        csv_path = _out_path(p["csv"], "snake.csv")
        with open(csv_path, "w", encoding="utf-8") as fp:
            fp.write(snake.to_csv(bm.dist_to_root()))
        outputs["csv"] = csv_path
    return outputs


def _quad_record(args: tuple) -> dict:
    seed, rep, n = args
    rng = RngStream(seed).named("sample-quad").split(rep)
    tree = sample_labeled_tree(n, rng)
    quad = cvs_construct(tree, sign=1)
    dist = bfs_metric(quad, quad.pointed_vertex)
    hist = np.bincount(dist[dist >= 0]).tolist()
    return {"rep": rep, "n": n, "seed": seed, "diameter": int(dist.max()),
            "distance_histogram": hist}


def _do_sample_quad(p: dict) -> dict[str, str]:
    rng = RngStream(p["seed"]).named("sample-quad")
    tree = sample_labeled_tree(p["n"], rng.split(0))
    quad = cvs_construct(tree, sign=1)
    quad.validate()
    out = _out_path(p["out"], "quad.json")
    with open(out, "w", encoding="utf-8") as fp:
        fp.write(quad.to_json() + "\n")
    outputs = {"map": out}
    if p["reps"] > 0:
        args = [(p["seed"], r, p["n"]) for r in range(p["reps"])]
        if p["threads"] > 1:
            with ProcessPoolExecutor(max_workers=p["threads"]) as ex:
                records = list(ex.map(_quad_record, args))
        else:
            records = [_quad_record(a) for a in args]
        rec_path = _out_path(p["records"], "quad_records.jsonl")
        _write_records(rec_path, records, p["format"])
        outputs["records"] = rec_path
    return outputs


def _do_csbp(p: dict) -> dict[str, str]:
    rng = RngStream(p["seed"]).named("csbp")
    values, _ = csbp_marginals(p["alpha"], p["c"], p["y0"], [p["t"]],
                               p["dt"], rng, size=p["reps"])
    lam = p["lam"]
    target = float(np.exp(-p["y0"] * u_t(p["alpha"], p["c"], lam, p["t"])))
    check = LawCheck.from_samples(
        "csbp_laplace", np.exp(-lam * values[:, 0]), target,
        se_mult=3.0, abs_slack=0.01,
        alpha=p["alpha"], c=p["c"], y0=p["y0"], t=p["t"], lam=lam,
        dt=p["dt"], reps=p["reps"], seed=p["seed"])
    out = _out_path(p["out"], "csbp_laplace.jsonl")
    _write_records(out, [check.to_record()], p["format"])
    return {"records": out}


def _do_merge_ppp(p: dict) -> dict[str, str]:
    rng = RngStream(p["seed"]).named("merge-ppp")
    w, ell = p["w"], p["ell"]
    if not 0 < ell <= 1.0:
        raise ValueError("ell must lie in (0, 1]")
    if w < p["x_min"]:
        raise ValueError("w must be at least x-min")
    counts = np.empty(p["reps"])
    for r in range(p["reps"]):
        ppp = sample_merge_ppp(p["x_min"], rng.split(r))
        pts = ppp.points
        counts[r] = np.count_nonzero((pts[:, 0] <= ell) & (pts[:, 1] >= w)) \
            if pts.size else 0
    target = ell / (2.0 * w * w)
    check = LawCheck.from_samples("merge_ppp_count", counts, target,
                                  se_mult=3.0, x_min=p["x_min"], w=w, ell=ell,
                                  reps=p["reps"], seed=p["seed"])
    out = _out_path(p["out"], "merge_ppp.jsonl")
    _write_records(out, [check.to_record()], p["format"])
    return {"records": out}


def _do_gff(p: dict) -> dict[str, str]:
    rng = RngStream(p["seed"]).named("gff")
    fld = sample_dgff(p["n"], rng.named("field"))
    space, bundles = gff_geodesic_bundle(
        fld, p["gamma"], rng=rng.named("pairs"), n_random_pairs=p["pairs"],
        boundary=True, cap=p["cap"])
    mult = overlay_multiplicity(p["n"], bundles)
    outputs = {}
    fpath = _out_path(p["field_csv"], "gff_field.csv")
    with open(fpath, "w", encoding="utf-8") as fp:
        fp.write(fld.to_csv())
    outputs["field"] = fpath
    opath = _out_path(p["overlay_csv"], "gff_overlay.csv")
    with open(opath, "w", encoding="utf-8") as fp:
        fp.write(overlay_csv(mult))
    outputs["overlay"] = opath
    if p["svg"]:
        spath = _out_path(p["svg"], "gff_overlay.svg")
        with open(spath, "w", encoding="utf-8") as fp:
            fp.write(overlay_svg(fld, mult))
        outputs["svg"] = spath
    frac = float(np.count_nonzero(mult) / mult.size)
    rpath = _out_path(p["records"], "gff_records.jsonl")
    _write_records(rpath, [{
        "n": p["n"], "seed": p["seed"], "gamma": p["gamma"],
        "pairs": p["pairs"], "geodesic_vertex_fraction": frac,
        "normalization": "unit-conductance degree-minus-adjacency Laplacian",
    }], p["format"])
    outputs["records"] = rpath
    return outputs


def _analyze_space(p: dict):
    kind = p["kind"]
    rng = RngStream(p["seed"]).named("analyze")
    if kind == "quad":
        tree = sample_labeled_tree(p["n"], rng.named("tree"))
        quad = cvs_construct(tree, sign=1)
        return space_from_quad(quad)
    if kind == "snake":
        exc = sample_excursion(p["n"], 1.0, rng.named("excursion"))
        snake = sample_snake_labels(exc, rng.named("labels"))
        from .spaces import DenseSpace
        return DenseSpace(quotient_metric(snake).dmat)
    if kind == "gff":
        side = max(3, int(round(np.sqrt(p["n"]))))
        fld = sample_dgff(side, rng.named("field"))
        from .spaces import space_from_field
        return space_from_field(fld, DEFAULT_GAMMA)
    raise ValueError(f"unknown analyze kind {kind!r}")


def _do_analyze(p: dict) -> dict[str, str]:
    space = _analyze_space(p)
    rng = RngStream(p["seed"]).named("analyze-stats")
    records: list[dict] = []
    if p["scales"]:
        scales = [float(s) for s in p["scales"].split(",")]
    else:
        ecc = float(space.dist_from(0).max())
        scales = [ecc * f for f in (0.04, 0.1, 0.2, 0.5)]
    if p["kind"] == "quad" and p["boundary_reps"] > 0:
        from .planar_map import (boundary_length_process,
                                 max_boundary_tail_report)
        maxima = []
        for r in range(p["boundary_reps"]):
            sub = RngStream(p["seed"]).named("analyze-boundary").split(r)
            tree = sample_labeled_tree(p["n"], sub)
            quad = cvs_construct(tree, 1)
            dist = bfs_metric(quad, quad.pointed_vertex)
            far = int(np.argmax(dist))
            if dist[far] < 2:
                continue
            ls = boundary_length_process(quad, quad.pointed_vertex, far)
            maxima.append(int(ls.max()))
        if len(maxima) >= 8:
            records.append({"stat": "boundary_length_tail", "seed": p["seed"],
                            "n": p["n"], **max_boundary_tail_report(maxima)})
    slope, stderr = frame_box_dimension(space, p["pairs"], scales,
                                        rng.named("frame"))
    records.append({"stat": "frame_box_dimension", "slope": slope,
                    "stderr": stderr, "pairs": p["pairs"],
                    "scales": scales, "seed": p["seed"]})
    gen = rng.named("centers").generator()
    centers = gen.integers(space.n, size=p["star_centers"])
    reports = star_census(space, p["star_k"], p["star_radius"], centers,
                          rng.named("stars"))
    for rep in reports:
        records.append({"stat": "star", "center": rep.center, "m": rep.k,
                        "radius": rep.disjoint_radius,
                        "skipped": rep.skipped, "seed": p["seed"]})
    if space.n >= 1000:
        eps_list = [float(s) for s in p["confluence_eps"].split(",")]
        rows = strong_confluence_statistic(space, eps_list,
                                           rng.named("confluence"),
                                           n_pairs=p["confluence_pairs"])
        for row in rows:
            records.append({"stat": "confluence", "seed": p["seed"], **row})
    out = _out_path(p["out"], "analyze.jsonl")
    _write_records(out, records, p["format"])
    return {"records": out}


def _do_acceptance(p: dict) -> dict[str, str]:
    from .acceptance import run_suite
    results = run_suite(suite=p["suite"], fast=bool(p["fast"]))
    out = _out_path(p["out"], "acceptance.jsonl")
    _write_records(out, [r.to_record() for r in results], p["format"])
    if any(not r.passed for r in results):
        raise ValueError("acceptance suite has failing criteria")
    return {"records": out}


# ---------------------------------------------------------------------------
# command table

def _opt(typ, default=None, required=False, help=""):
    return (typ, default, required, help)


_COMMANDS = [
    _Cmd("sample-snake", {
        "n": _opt(int, 512, help="grid size"),
        "length": _opt(float, 1.0, help="excursion time length"),
        "seed": _opt(int, required=True, help="random seed"),
        "size_cap": _opt(int, 4096, help="metric-closure size cap"),
        "out": _opt(str, help="binary map output"),
        "csv": _opt(str, help="optional per-point CSV export"),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_sample_snake, help="label-process metric space"),
    _Cmd("sample-quad", {
        "n": _opt(int, 1000, help="number of faces"),
        "seed": _opt(int, required=True),
        "reps": _opt(int, 0, help="extra replicas for JSON-lines records"),
        "out": _opt(str),
        "records": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_sample_quad, help="random quadrangulation via corner chaining"),
    _Cmd("csbp", {
        "alpha": _opt(float, 1.5),
        "c": _opt(float, 1.0),
        "y0": _opt(float, 1.0),
        "t": _opt(float, 1.0),
        "lam": _opt(float, 1.0, help="Laplace argument (alias --lambda)"),
        "reps": _opt(int, 100000),
        "dt": _opt(float, 1e-3),
        "seed": _opt(int, required=True),
        "out": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_csbp, help="branching-process Laplace-law Monte Carlo"),
    _Cmd("merge-ppp", {
        "x_min": _opt(float, 1e-3),
        "w": _opt(float, 0.1, help="depth threshold"),
        "ell": _opt(float, 1.0, help="interval length in (0, 1]"),
        "reps": _opt(int, 2000),
        "seed": _opt(int, required=True),
        "out": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_merge_ppp, help="merge point process Poisson check"),
    _Cmd("gff", {
        "n": _opt(int, 64, help="box side length"),
        "gamma": _opt(float, DEFAULT_GAMMA),
        "pairs": _opt(int, 8, help="boundary endpoint pairs"),
        "cap": _opt(int, 4096),
        "seed": _opt(int, required=True),
        "field_csv": _opt(str),
        "overlay_csv": _opt(str),
        "svg": _opt(str),
        "records": _opt(str),
        "out": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_gff, help="free-field metric and geodesic overlay"),
    _Cmd("analyze", {
        "kind": _opt(str, "quad", help="quad | snake | gff"),
        "n": _opt(int, 2000),
        "pairs": _opt(int, 20),
        "scales": _opt(str, None, help="comma list; default derives from the "
                                       "space diameter"),
        "star_k": _opt(int, 5),
        "star_radius": _opt(float, 3.0),
        "star_centers": _opt(int, 8),
        "confluence_eps": _opt(str, "1,2,3,4"),
        "confluence_pairs": _opt(int, 60),
        "boundary_reps": _opt(int, 0, help="hull-perimeter tail report samples"),
        "seed": _opt(int, required=True),
        "out": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_analyze, help="geodesic statistics on a sampled space"),
    _Cmd("acceptance", {
        "suite": _opt(str, "primary"),
        "fast": _opt(bool, False, help="reduced sizes, smoke run"),
        "out": _opt(str),
        "threads": _opt(int, 1),
        "format": _opt(str, "json"),
    }, _do_acceptance, stochastic=False, help="run the acceptance criteria"),
]


def run(argv) -> int:
    parser = argparse.ArgumentParser(prog="bmlab")
    sub = parser.add_subparsers(dest="command", required=True)
    tables = {}
    for cmd in _COMMANDS:
        p = cmd.add_parser(sub)
        tables[cmd.name] = (cmd, p)
    # accept --lambda as an alias for --lam on csbp
    argv = ["--lam" if a == "--lambda" else a for a in argv]
    ns = parser.parse_args(argv)
    cmd, subparser = tables[ns.command]
    params = cmd.finalize(ns, subparser)
    manifest = _manifest_for(cmd.name, params)
    try:
        outputs = cmd.action(params)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if outputs:
        _finish(manifest, outputs)
        for label, path in outputs.items():
            print(f"{label}: {path}")
    return 0


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
