"""Theorem-level drivers: annulus construction, volume checks, concentration.

The boundary-free annulus is built in two root-finding stages: the radius
ratio R* kills the curvature of the inner sphere, then the inner radius r*
kills the domain defect of the outer sphere.  Both use plain bisection on
sign changes certified by stored endpoint values.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from .curvature import annulus_curvature, annulus_defect, fb_defect, fit_power_law, ScanFit
from .geometry import (
    Annulus,
    Ball,
    Complement,
    Domain,
    HalfSpace,
    Intersection,
    Union,
    boundary_normal,
    lawson_volume_fraction,
    volume_in,
)
from .kernel import KernelSpec, sphere_area
from .quadrature import QuadConfig
from .variation import TangentField, contact_set, first_variation_formula


class BracketError(RuntimeError):
    """No certified sign change found; endpoint values attached."""

    def __init__(self, msg, history):
        super().__init__(msg)
        self.history = history


@dataclass(frozen=True)
class AnnulusSolution:
    s: float
    Rstar: float
    rstar: float
    residual_f: float
    residual_g: float
    bracket_f: tuple
    bracket_g: tuple
    n: int = 2

    @property
    def inner_radius(self):
        return self.rstar

    @property
    def outer_radius(self):
        return self.Rstar * self.rstar

    def valid(self):
        return self.rstar < 1.0 < self.Rstar * self.rstar

    def to_json(self):
        return json.dumps(
            {
                "s": self.s,
                "R_star": self.Rstar,
                "r_star": self.rstar,
                "inner_radius": self.inner_radius,
                "outer_radius": self.outer_radius,
                "residual_curvature": self.residual_f,
                "residual_defect": self.residual_g,
                "no_boundary_contact": self.valid(),
            }
        )


def _bisect(fun, lo, hi, flo, fhi, xtol):
    """Plain bisection with certified sign change; returns (root, f(root), history)."""
    history = [(lo, flo), (hi, fhi)]
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        history.append((mid, fm))
        if fm == 0.0:
            return mid, fm, history
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    mid = 0.5 * (lo + hi)
    fm = fun(mid)
    history.append((mid, fm))
    return mid, fm, history


def solve_Rstar(s: float, cfg: QuadConfig, tol_R: float = 1e-4, R_max: float = 1e3,
                n: int = 2):
    """Radius ratio at which the annular shell has zero inner-sphere curvature.

    Expands the bracket geometrically (the curvature is decreasing in the
    ratio) and bisects.  R_max defaults to 1e3; small orders need it raised
    (the ratio grows like 2^(1/s))."""
    if tol_R < 1e-4:
        raise ValueError("radius tolerance below 1e-4 is not supported")

    def f(R):
        return annulus_curvature(s, R, cfg, n=n)

    lo = 1.0 + 1e-3
    flo = f(lo)
    history = [(lo, flo)]
    if flo <= 0:
        raise BracketError("curvature already negative at the inner bracket", history)
    hi = 2.0
    fhi = f(hi)
    history.append((hi, fhi))
    while fhi > 0:
        lo, flo = hi, fhi
        hi *= 2.0
        if hi > R_max:
            raise BracketError(
                f"no sign change of the shell curvature up to R_max = {R_max:g}", history
            )
        fhi = f(hi)
        history.append((hi, fhi))
    root, froot, hist2 = _bisect(f, lo, hi, flo, fhi, tol_R * max(1.0, lo))
    return root, abs(froot), tuple(history + hist2[2:])


def solve_rstar(s: float, Rstar: float, cfg: QuadConfig, tol_r: float = 1e-4, n: int = 2):
    """Inner radius at which the domain defect of the outer sphere vanishes."""
    if Rstar <= 3.0:
        raise BracketError(
            f"ratio {Rstar:g} <= 3: outside the certified sign-change regime "
            "(the order s is too large)",
            [],
        )

    def g(r):
        return annulus_defect(s, r, Rstar, cfg, n=n)

    lo = 1.0 / Rstar + 1e-3
    hi = 0.999
    glo, ghi = g(lo), g(hi)
    history = [(lo, glo), (hi, ghi)]
    if not (glo < 0 < ghi):
        raise BracketError(
            f"no sign change of the domain defect: g({lo:g}) = {glo:g}, g({hi:g}) = {ghi:g}",
            history,
        )
    root, groot, hist2 = _bisect(g, lo, hi, glo, ghi, tol_r)
    return root, abs(groot), tuple(history + hist2[2:])


def solve_annulus(s: float, cfg: QuadConfig, tol_R: float = 1e-4, tol_r: float = 1e-4,
                  R_max: float = 4e6, n: int = 2) -> AnnulusSolution:
    """Boundary-free critical annulus in the unit ball (small orders)."""
    Rstar, res_f, hist_f = solve_Rstar(s, cfg, tol_R=tol_R, R_max=R_max, n=n)
    rstar, res_g, hist_g = solve_rstar(s, Rstar, cfg, tol_r=tol_r, n=n)
    return AnnulusSolution(s, Rstar, rstar, res_f, res_g, tuple(hist_f), tuple(hist_g), n)


def sweep_Rstar(s_list, cfg: QuadConfig, R_max: float = 4e6, n: int = 2):
    """Critical ratios over a grid of orders (divergence proxy as s drops)."""
    out = []
    for s in s_list:
        Rstar, res, _ = solve_Rstar(s, cfg, R_max=R_max, n=n)
        out.append((s, Rstar, res))
    return out


# ---------------------------------------------------------------------------
# volume condition


@dataclass(frozen=True)
class VolumeCheck:
    vol_in: float
    vol_out: float
    defect: float
    verdict: bool
    tol: float

    def to_json(self):
        return json.dumps(
            {
                "volume_inside": self.vol_in,
                "volume_complement": self.vol_out,
                "defect": self.defect,
                "consistent_with_unbounded_criticality": self.verdict,
            }
        )


def volume_condition_check(E, omega: Domain, tol_vol: float = 1e-6) -> VolumeCheck:
    vol_in = volume_in(E, omega)
    vol_out = omega.volume() - vol_in
    defect = vol_in - vol_out
    return VolumeCheck(vol_in, vol_out, defect, abs(defect) <= tol_vol, tol_vol)


def lawson_halfvolume_alpha(n: int, m: int, tol: float = 1e-9) -> float:
    """Opening at which the cone halves the unit-ball volume (bisection on
    the closed-form monotone volume fraction, n+m <= 3)."""

    def frac(alpha):
        return lawson_volume_fraction(n, m, alpha) - 0.5

    lo, hi = 1e-9, 1.0
    while frac(hi) < 0:
        hi *= 2.0
        if hi > 1e9:
            raise BracketError("cone volume fraction never reaches 1/2", [])
    return float(brentq(frac, lo, hi, xtol=tol))


def catenoid_volume_defect(R: float) -> float:
    """H^3(F ∩ B_R) - H^3(F^c ∩ B_R) for the classical catenoid solid
    F = {(x', x3): |x'| >= 1, |x3| < log(|x'| + sqrt(|x'|^2 - 1))}."""
    if R <= 0:
        raise ValueError("ball radius must be positive")
    ball_vol = 4.0 / 3.0 * math.pi * R**3
    if R <= 1.0:
        return -ball_vol
    f = lambda r: math.asinh(math.sqrt(r * r - 1.0))  # = log(r + sqrt(r^2-1))

    def height(r):
        return min(f(r), math.sqrt(max(R * R - r * r, 0.0)))

    # split at the profile/sphere crossover for smooth panels
    cross = None
    if f(R - 1e-12) > 0:
        g = lambda r: f(r) - math.sqrt(max(R * R - r * r, 0.0))
        if g(R - 1e-9) > 0:
            cross = brentq(g, 1.0 + 1e-15, R - 1e-9, xtol=1e-13)
    pts = [1.0] + ([cross] if cross else []) + [R]
    vol = 0.0
    for a, b in zip(pts[:-1], pts[1:]):
        v, _ = quad(lambda r: 4.0 * math.pi * r * height(r), a, b, limit=200)
        vol += v
    return 2.0 * vol - ball_vol


def catenoid_defect_grid(r_lo=0.5, r_hi=8.0, count=40):
    grid = np.linspace(r_lo, r_hi, count)
    return [(float(R), catenoid_volume_defect(float(R))) for R in grid]


# ---------------------------------------------------------------------------
# s -> 1 concentration


@dataclass(frozen=True)
class ConcentrationRow:
    s: float
    lhs: float
    rhs: float

    @property
    def ratio(self):
        return self.lhs / self.rhs if self.rhs != 0.0 else math.nan


def concentration_weight_sum(E, omega: Domain, X: TangentField, cfg: QuadConfig,
                             n: int = 2) -> float:
    """Limit prediction: kappa * sum over contacts of the signed angle weight.

    kappa = 16 n / omega_n is the limit of c(n,s)/(1-s); the per-contact sign
    is -sign(nu_E . nu_Omega), the orientation the signed band integral
    carries (the angle density itself is only defined up to pi/2)."""
    from .curvature import angle_density

    contacts, sticking = contact_set(E, omega)
    kappa = 16.0 * n / sphere_area(n)
    total = 0.0
    for ct in contacts:
        p = ct.point
        nu_e = boundary_normal(E, p)
        nu_o = omega.boundary_normal(p)
        dot = float(nu_e @ nu_o)
        g = angle_density(ct.psi, n, cfg)
        xi = float(X(p[None, :])[0] @ nu_e)
        total += -math.copysign(1.0, dot) * g * xi if dot != 0.0 else 0.0
    return kappa * total


def s_to_1_concentration(E, omega: Domain, X: TangentField, s_list, cfg: QuadConfig):
    """Exterior defect integral against the boundary concentration law."""
    rhs = concentration_weight_sum(E, omega, X, cfg)
    rows = []
    for s in s_list:
        k = KernelSpec(2, s)
        fm = first_variation_formula(E, omega, X, k, cfg)
        rows.append(ConcentrationRow(s, fm.exterior, rhs))
    return rows


# ---------------------------------------------------------------------------
# stickiness scans


def sticking_outside_fixture(width: float = 0.4):
    """Ball plus a thin exterior slab touching it at a single boundary point:
    the configuration excluded for critical sets (sticking from outside)."""
    slab = Intersection(
        (
            HalfSpace((-1.0, 0.0), -1.0),  # x1 > 1
            HalfSpace((0.0, 1.0), width),  # x2 < width
            HalfSpace((0.0, -1.0), width),  # x2 > -width
        )
    )
    return Union((Ball((0.0, 0.0), 1.0), slab))


def stickiness_blowup_scan(s: float, cfg: QuadConfig, width: float = 0.4,
                           n_points: int = 9) -> ScanFit:
    """Defect blow-up along the slab edge toward the touching point."""
    E = sticking_outside_fixture(width)
    omega = Domain(Ball((0.0, 0.0), 1.0))
    k = KernelSpec(2, s)
    dists, vals = [], []
    for j in range(1, n_points + 1):
        y = width * 2.0 ** (-j)
        x = np.array([1.0, y])
        rep = fb_defect(E, omega, x, k, cfg)
        dists.append(math.sqrt(1.0 + y * y) - 1.0)
        vals.append(rep.value)
    return fit_power_law(dists, vals)


@dataclass(frozen=True)
class _WedgeDomain:
    """Half-plane with a shallow wedge carved below |y1| > 1, cut to a ball.

    Realizes the sticking-from-inside picture; duck-types the domain
    interface the defect evaluator needs."""

    slope: float = 0.5
    radius: float = 3.0

    @property
    def dim(self):
        return 2

    @property
    def bounded(self):
        return True

    @property
    def shape(self):
        m = self.slope
        nrm = math.sqrt(1.0 + m * m)
        return Intersection(
            (
                Union(
                    (
                        HalfSpace((0.0, -1.0), 0.0),  # y2 > 0
                        HalfSpace((-m / nrm, -1.0 / nrm), -m / nrm),  # y2 > -m(y1-1)
                        HalfSpace((m / nrm, -1.0 / nrm), -m / nrm),  # y2 > m(y1+1)
                    )
                ),
                Ball((0.0, 0.0), self.radius),
            )
        )

    def sign(self, pts):
        return self.shape.sign(pts)

    def exterior_distance(self, x):
        # enough for the gate: distance to the bounding ball from outside
        return max(0.0, math.sqrt(float(np.dot(x, x))) - self.radius)


def sticking_inside_scan(s: float, cfg: QuadConfig, n_points: int = 8) -> ScanFit:
    """Approach along the interface toward a sticking-from-inside domain:
    the defect stays bounded (no contradiction with criticality)."""
    omega = _WedgeDomain()
    E = HalfSpace((0.0, -1.0), 0.0)  # {y2 > 0}
    k = KernelSpec(2, s)
    dists, vals = [], []
    for j in range(n_points):
        delta = 0.5 * 2.0 ** (-j)
        x = np.array([omega.radius + delta, 0.0])
        rep = fb_defect(E, omega, x, k, cfg)
        dists.append(delta)
        vals.append(rep.value)
    scale = max(abs(v) for v in vals)
    spread = max(vals) - min(vals)
    bounded = spread < 10.0 * max(scale, 1e-12)
    return ScanFit(0.0, -math.inf, int(np.sign(vals[-1])), tuple(dists), tuple(vals), bounded)
