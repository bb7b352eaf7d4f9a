#!/usr/bin/env python3
"""Regenerate the frozen oracle anchors in tests/_anchors/anchors.json.

Brute-force Monte Carlo cross-checks (independent of the package engine) plus
high-precision constants and first-verified-run regression values.  Takes a
few minutes at the default 1e8 samples.
"""

import argparse
import json
import math
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "tests"))

import mpmath as mp
import numpy as np

from fracmin.curvature import ball_curvature_raw
from fracmin.experiments import catenoid_defect_grid, solve_annulus, solve_Rstar
from fracmin.kernel import frac_constant
from fracmin.quadrature import QuadConfig
import oracles


def exact_constants():
    mp.mp.dps = 40
    out = {}
    for n, s in ((1, 0.5), (2, 0.5), (2, 0.3), (2, 0.7), (3, 0.5)):
        ss = mp.mpf(s)
        val = (
            ss * (1 - ss) * 2 ** (2 + 2 * ss) * mp.gamma(mp.mpf(n) / 2 + ss)
            / (mp.pi ** (mp.mpf(n) / 2) * mp.gamma(2 - ss))
        )
        out[f"{n}_{s}"] = float(mp.nstr(val, 17))
    return out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--samples", type=float, default=1e8)
    ap.add_argument("--out", default=os.path.join(os.path.dirname(__file__), "..", "tests", "_anchors", "anchors.json"))
    args = ap.parse_args()
    n_samp = int(args.samples)

    anchors = {"mc_samples": n_samp}
    anchors["frac_constant"] = exact_constants()

    print("ball curvature MC oracle (plain excision) ...")
    anchors["ball_curvature"] = {}
    for s in (0.3, 0.5, 0.7):
        val, sig = oracles.ball_curvature_mc(s, n_samples=n_samp, eps0=2e-2, levels=6)
        exact = frac_constant(2, s) * ball_curvature_raw(s, 2)
        print(f"  s={s}: mc {val:.6f} +- {sig:.2g}   (radial closed form {exact:.6f})")
        anchors["ball_curvature"][str(s)] = {"value": val, "sigma": sig}

    print("half-plane perimeter MC oracle ...")
    anchors["halfplane_perimeter"] = {}
    for s in (0.2, 0.5, 0.8):
        table = oracles.halfplane_perimeter_mc(s, n_samples=n_samp)
        print(f"  s={s}: total {table['total'][0]:.6f} +- {table['total'][1]:.2g}")
        anchors["halfplane_perimeter"][str(s)] = {k: list(v) for k, v in table.items()}

    print("lawson (2,1) half-volume MC ...")
    frac, sig = oracles.lawson_volume_mc(2, 1, math.sqrt(3.0), n_samples=4 * 10**7)
    anchors["lawson_2_1"] = {"alpha": math.sqrt(3.0), "fraction": frac, "sigma": sig}
    print(f"  fraction at sqrt(3): {frac:.6f} +- {sig:.2g}")

    print("singular region integral MC ...")
    anchors["region_singular"] = {}
    for s in (0.5,):
        val, sig = oracles.region_singular_mc(s, n_samples=4 * 10**7)
        anchors["region_singular"][str(s)] = {"value": val, "sigma": sig}
        print(f"  s={s}: {val:.6f} +- {sig:.2g}")

    print("regression anchors (first verified run) ...")
    cfg = QuadConfig(rel_tol=1e-8, seed=0)
    Rstar, resid, _ = solve_Rstar(0.5, cfg)
    anchors["Rstar_05"] = {"value": Rstar, "residual": resid}
    print(f"  R*(0.5) = {Rstar:.8f}")
    sol = solve_annulus(0.1, cfg)
    anchors["annulus_01"] = {"Rstar": sol.Rstar, "rstar": sol.rstar}
    print(f"  s=0.1: R* = {sol.Rstar:.6f}, r* = {sol.rstar:.8f}")
    grid = catenoid_defect_grid()
    margin = min(abs(d) for _, d in grid)
    signs = sum(1 for (_, a), (_, b) in zip(grid, grid[1:]) if a * b < 0)
    anchors["catenoid"] = {"grid_min_abs_defect": margin, "grid_sign_changes": signs}
    print(f"  catenoid grid: min |defect| = {margin:.6f}, sign changes = {signs}")

    os.makedirs(os.path.dirname(args.out), exist_ok=True)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(anchors, fh, indent=2, sort_keys=True)
        fh.write("\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
