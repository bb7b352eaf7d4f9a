"""Batch command-line front end.

Commands: curvature, perimeter, annulus, sweep-s, variation, volume,
concentration, scan.  Every command resolves a manifest (command, config,
seed, output directory, content hash) and writes byte-reproducible CSV:
'.' decimals, newline endings, 17 significant digits, values independent of
worker count.  FRACMIN_THREADS caps parallelism without changing results.

Exit codes: 0 success, 2 configuration error, 3 numerical-convergence
failure, 4 hypothesis violation (e.g. transversality).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
import time

import numpy as np

from .curvature import (
    ClassificationError,
    CornerError,
    corner_blowup_scan,
    fb_defect,
    kernel_mass_scan,
    mean_curvature,
    tilted_defect_scan,
)
from .experiments import (
    BracketError,
    catenoid_defect_grid,
    lawson_halfvolume_alpha,
    s_to_1_concentration,
    solve_annulus,
    stickiness_blowup_scan,
    sweep_Rstar,
    volume_condition_check,
)
from .geometry import Ball, Domain, GeometryError, HalfSpace, PlanarCornerPair
from .kernel import KernelSpec
from .perimeter import frac_perimeter
from .quadrature import NoConvergenceError, QuadConfig, QuadratureError
from .scenes import SceneError, load_scene
from .variation import (
    TangencyError,
    TransversalityError,
    first_variation_fd,
    first_variation_formula,
    make_tangent_field,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_HYPOTHESIS = 4


def _fmt(x):
    return "%.17g" % float(x)


def _git_blob_hash(data: bytes) -> str:
    return hashlib.sha1(b"blob %d\0" % len(data) + data).hexdigest()


class Manifest:
    def __init__(self, command, config_path, seed, out_dir, resolved):
        self.command = command
        self.config_path = config_path
        self.seed = seed
        self.out_dir = out_dir
        self.resolved = resolved
        blob = json.dumps(resolved, sort_keys=True).encode()
        self.hash = _git_blob_hash(blob)
        self.started = time.time()

    def write(self, name="manifest.json"):
        doc = {
            "command": self.command,
            "config": self.config_path,
            "seed": self.seed,
            "out_dir": self.out_dir,
            "hash": self.hash,
            "wall_time_s": time.time() - self.started,
            "resolved_config": self.resolved,
        }
        path = os.path.join(self.out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return path


def _write_csv(manifest: Manifest, name, header, rows):
    os.makedirs(manifest.out_dir, exist_ok=True)
    path = os.path.join(manifest.out_dir, name)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# manifest: {manifest.hash}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) if isinstance(c, str) else _fmt(c) for c in row) + "\n")
    return path


def _write_json(manifest: Manifest, name, payload):
    os.makedirs(manifest.out_dir, exist_ok=True)
    path = os.path.join(manifest.out_dir, name)
    doc = {"manifest": manifest.hash}
    doc.update(payload)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _resolve_config(args):
    cfg_dict = {}
    if args.config:
        with open(args.config, "r", encoding="utf-8") as fh:
            cfg_dict = json.load(fh)
    if args.seed is not None:
        cfg_dict["seed"] = args.seed
    cfg = QuadConfig(**cfg_dict)
    return cfg, json.loads(cfg.to_json())


def _common(sub):
    sub.add_argument("--scene", help="scene JSON file or literal JSON")
    sub.add_argument("--config", help="QuadConfig JSON file")
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--out", default="out")
    sub.add_argument("--dry-run", action="store_true")
    sub.add_argument("--s", type=float, default=0.5)


def build_parser():
    p = argparse.ArgumentParser(prog="fracmin", description=__doc__)
    subs = p.add_subparsers(dest="command", required=True)

    c = subs.add_parser("curvature", help="curvature/defect reports at listed points")
    _common(c)
    c.add_argument("--points", required=False, help="JSON list of points (inline or file)")

    per = subs.add_parser("perimeter", help="localized perimeter breakdown")
    _common(per)

    ann = subs.add_parser("annulus", help="boundary-free critical annulus")
    _common(ann)
    ann.add_argument("--r-max", type=float, default=4e6)

    sw = subs.add_parser("sweep-s", help="critical ratio over a grid of orders")
    _common(sw)
    sw.add_argument("--s-list", default="0.4,0.2,0.1,0.05")

    var = subs.add_parser("variation", help="first-variation identity check")
    _common(var)
    var.add_argument("--field", default='{"kind":"rotation","amplitude":1.0,"plateau":1.3,"support":1.9}')
    var.add_argument("--h", type=float, default=1e-2)

    vol = subs.add_parser("volume", help="volume-condition checks")
    _common(vol)
    vol.add_argument("--catenoid-grid", action="store_true")
    vol.add_argument("--lawson", nargs=2, type=int, metavar=("N", "M"))

    conc = subs.add_parser("concentration", help="boundary concentration of the defect term")
    _common(conc)
    conc.add_argument("--field", default='{"kind":"rotation","amplitude":1.0,"plateau":1.5,"support":2.5}')
    conc.add_argument("--s-list", default="0.7,0.8,0.9,0.95")

    scan = subs.add_parser("scan", help="blow-up exponent scans")
    _common(scan)
    scan.add_argument("--kind", required=True,
                      choices=["corner", "tilt", "stickiness", "kernel-mass", "sticking-inside"])
    scan.add_argument("--theta", type=float, default=0.4)
    scan.add_argument("--theta2", type=float, default=-0.3)
    return p


def _load_points(arg):
    if arg is None:
        raise SceneError("curvature needs --points")
    text = arg
    if not text.lstrip().startswith("["):
        with open(arg, "r", encoding="utf-8") as fh:
            text = fh.read()
    pts = json.loads(text)
    return [np.asarray(p, dtype=float) for p in pts]


def _cmd_curvature(args, cfg, manifest):
    E, omega = load_scene(args.scene)
    pts = _load_points(args.points)
    k = KernelSpec(E.dim, args.s)
    rows = []
    for p in pts:
        if omega is not None and omega.exterior_distance(p) > 1e-9:
            rep = fb_defect(E, omega, p, k, cfg)
        else:
            rep = mean_curvature(E, p, k, cfg, omega=omega)
        rows.append(
            (";".join(_fmt(c) for c in rep.location), rep.value,
             rep.result.error_estimate, rep.classification)
        )
    _write_csv(manifest, "curvature.csv", ["x", "value", "stderr", "classification"], rows)
    return EXIT_OK


def _cmd_perimeter(args, cfg, manifest):
    E, omega = load_scene(args.scene)
    if omega is None:
        raise SceneError("perimeter needs a domain in the scene")
    k = KernelSpec(E.dim, args.s)
    bd = frac_perimeter(E, omega, k, cfg)
    _write_csv(
        manifest, "perimeter.csv",
        ["term", "value", "stderr", "n_samples", "method"],
        [
            ("in_in",) + tuple(bd.term_in_in.to_csv_row().split(",")),
            ("in_out",) + tuple(bd.term_in_out.to_csv_row().split(",")),
            ("out_in",) + tuple(bd.term_out_in.to_csv_row().split(",")),
        ],
    )
    _write_json(manifest, "perimeter.json", json.loads(bd.to_json()))
    return EXIT_OK


def _cmd_annulus(args, cfg, manifest):
    sol = solve_annulus(args.s, cfg, R_max=args.r_max)
    _write_json(manifest, "annulus.json", json.loads(sol.to_json()))
    rows = [(R, val) for R, val in sol.bracket_f] + [(r, val) for r, val in sol.bracket_g]
    _write_csv(manifest, "annulus-residuals.csv", ["parameter", "residual"], rows)
    return EXIT_OK


def _cmd_sweep(args, cfg, manifest):
    s_list = [float(x) for x in args.s_list.split(",")]
    rows = sweep_Rstar(s_list, cfg)
    _write_csv(manifest, f"sweep-s-{manifest.seed}.csv", ["s", "R_star", "residual"], rows)
    return EXIT_OK


def _cmd_variation(args, cfg, manifest):
    E, omega = load_scene(args.scene)
    if omega is None:
        raise SceneError("variation needs a domain in the scene")
    X = make_tangent_field(json.loads(args.field), omega)
    k = KernelSpec(E.dim, args.s)
    fd = first_variation_fd(E, omega, X, k, cfg, h=args.h)
    fm = first_variation_formula(E, omega, X, k, cfg)
    scale = max(abs(fd.value), abs(fm.total), 1e-6)
    agree = abs(fd.value - fm.total) <= max(0.02 * scale, fd.error + fm.error)
    _write_json(
        manifest, "variation.json",
        {
            "fd": fd.value,
            "fd_error": fd.error,
            "fd_flagged": fd.flagged,
            "formula_interior": fm.interior,
            "formula_exterior": fm.exterior,
            "formula_total": fm.total,
            "formula_error": fm.error,
            "verdict": "agree" if agree else "disagree",
        },
    )
    return EXIT_OK


def _cmd_volume(args, cfg, manifest):
    payload = {}
    rows = []
    if args.scene:
        E, omega = load_scene(args.scene)
        vc = volume_condition_check(E, omega)
        payload["volume_check"] = json.loads(vc.to_json())
        rows.append(("scene", vc.vol_in, vc.vol_out, vc.defect))
    if args.lawson:
        n, m = args.lawson
        alpha = lawson_halfvolume_alpha(n, m)
        payload["lawson_halfvolume_alpha"] = alpha
        rows.append((f"lawson-{n}-{m}", alpha, 0.5, 0.0))
    if args.catenoid_grid:
        grid = catenoid_defect_grid()
        payload["catenoid_min_abs_defect"] = min(abs(d) for _, d in grid)
        for R, dv in grid:
            rows.append(("catenoid", R, 0.0, dv))
    if rows:
        _write_csv(manifest, f"volume-{args.s}-{manifest.seed}.csv",
                   ["case", "a", "b", "defect"], rows)
    _write_json(manifest, "volume.json", payload)
    return EXIT_OK


def _cmd_concentration(args, cfg, manifest):
    E, omega = load_scene(args.scene)
    if omega is None:
        raise SceneError("concentration needs a domain in the scene")
    X = make_tangent_field(json.loads(args.field), omega)
    s_list = [float(x) for x in args.s_list.split(",")]
    rows = s_to_1_concentration(E, omega, X, s_list, cfg)
    _write_csv(
        manifest, f"concentration-{args.s}-{manifest.seed}.csv",
        ["s", "lhs", "rhs", "ratio"],
        [(r.s, r.lhs, r.rhs, r.ratio) for r in rows],
    )
    return EXIT_OK


def _cmd_scan(args, cfg, manifest):
    if args.kind == "corner":
        E = PlanarCornerPair(args.theta, args.theta2)
        d1 = np.array([math.cos(args.theta), math.sin(args.theta)])
        path = [0.5 * 2.0 ** (-j) * d1 for j in range(10)]
        fit = corner_blowup_scan(E, path, args.s, cfg)
    elif args.kind == "tilt":
        fit = tilted_defect_scan(args.theta, args.s, cfg)
    elif args.kind == "stickiness":
        fit = stickiness_blowup_scan(args.s, cfg)
    elif args.kind == "sticking-inside":
        from .experiments import sticking_inside_scan

        fit = sticking_inside_scan(args.s, cfg)
    else:
        omega = Domain(Ball((0.0, 0.0), 1.0))
        path = [np.array([1.0 + 2.0 ** (-k), 0.0]) for k in range(10, 21)]
        fit = kernel_mass_scan(omega, path, KernelSpec(2, args.s), cfg)
    _write_csv(
        manifest, f"scan-{args.kind}-{args.s}-{manifest.seed}.csv",
        ["dist", "value"], list(zip(fit.dists, fit.values)),
    )
    _write_json(
        manifest, f"scan-{args.kind}.json",
        {
            "exponent": fit.exponent,
            "sign": fit.sign,
            "bounded": fit.bounded,
            "order_s": args.s,
        },
    )
    return EXIT_OK


_DISPATCH = {
    "curvature": _cmd_curvature,
    "perimeter": _cmd_perimeter,
    "annulus": _cmd_annulus,
    "sweep-s": _cmd_sweep,
    "variation": _cmd_variation,
    "volume": _cmd_volume,
    "concentration": _cmd_concentration,
    "scan": _cmd_scan,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg, resolved = _resolve_config(args)
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    resolved_full = {"config": resolved, "args": {
        k: v for k, v in sorted(vars(args).items()) if k not in ("config", "out") and v is not None
    }}
    if args.dry_run:
        print(json.dumps(resolved_full, indent=2, sort_keys=True))
        return EXIT_OK
    manifest = Manifest(args.command, args.config, cfg.seed, args.out, resolved_full)
    try:
        code = _DISPATCH[args.command](args, cfg, manifest)
    except (TransversalityError, TangencyError, CornerError, ClassificationError) as exc:
        print(f"hypothesis violation: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (SceneError, GeometryError, ValueError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BracketError, NoConvergenceError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        if isinstance(exc, BracketError) and exc.history:
            for x, v in exc.history:
                print(f"  f({x:.6g}) = {v:.6g}", file=sys.stderr)
        return EXIT_NUMERIC
    manifest.write()
    return code


if __name__ == "__main__":
    sys.exit(main())
