"""Nonlocal mean curvature, the free-boundary defect, and blow-up scans."""

from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from .geometry import (
    Annulus,
    Ball,
    Complement,
    Domain,
    HalfSpace,
    Intersection,
    PieGlued,
    PlanarCornerPair,
    Union,
    nearest_singular_distance,
    on_boundary,
)
from .kernel import KernelSpec
from .quadrature import (
    IntegralResult,
    QuadConfig,
    QuadratureError,
    _dirs_2d,
    _merge_crossings,
    _segment_signs,
    _wrap_intervals,
    adaptive_intervals,
    integrate_angular,
    pv_signed_kernel,
)

_EXTERIOR_CLEARANCE = 1e-9


class CornerError(ValueError):
    """Evaluation point is a corner of the boundary (curvature diverges)."""


class ClassificationError(ValueError):
    """Evaluation point is on the wrong side of the reference domain."""


@dataclass(frozen=True)
class CurvatureReport:
    value: float
    location: tuple
    result: IntegralResult
    classification: str

    def to_csv_row(self) -> str:
        loc = ";".join("%.17g" % c for c in self.location)
        return "%s,%.17g,%.17g,%s" % (
            loc,
            self.value,
            self.result.error_estimate,
            self.classification,
        )


def _symmetry_axis(E, x):
    """Axis through x for axisymmetric 3-d configurations, or raise."""
    x = np.asarray(x, dtype=float)
    centers = []

    def walk(shape):
        if isinstance(shape, (Ball, Annulus)):
            centers.append(np.asarray(shape.center, dtype=float))
        elif isinstance(shape, Complement):
            walk(shape.base)
        elif isinstance(shape, (Union, Intersection)):
            for p in shape.parts:
                walk(p)
        elif isinstance(shape, HalfSpace):
            centers.append(None)  # handled below
        else:
            raise QuadratureError(
                f"3-d evaluation supports spheres/half-spaces only, not {type(shape).__name__}"
            )

    walk(E)
    normals = []

    def walk2(shape):
        if isinstance(shape, HalfSpace):
            normals.append(np.asarray(shape.normal))
        elif isinstance(shape, Complement):
            walk2(shape.base)
        elif isinstance(shape, (Union, Intersection)):
            for p in shape.parts:
                walk2(p)

    walk2(E)
    axis = None
    for c in centers:
        if c is None:
            continue
        v = x - c
        if float(v @ v) > 1e-24:
            cand = v / math.sqrt(float(v @ v))
            if axis is None:
                axis = cand
            elif abs(abs(float(axis @ cand)) - 1.0) > 1e-10:
                raise QuadratureError("configuration is not axisymmetric about the point")
    for nu in normals:
        if axis is None:
            axis = nu
        elif abs(abs(float(axis @ nu)) - 1.0) > 1e-10:
            raise QuadratureError("configuration is not axisymmetric about the point")
    if axis is None:
        raise QuadratureError("no symmetry axis found")
    return axis


def mean_curvature(E, x, kernel: KernelSpec, cfg: QuadConfig, omega: Domain | None = None):
    """Nonlocal mean curvature of E at a boundary point (principal value)."""
    x = np.asarray(x, dtype=float)
    if nearest_singular_distance(E, x) < _EXTERIOR_CLEARANCE:
        raise CornerError("corner point: nonlocal curvature diverges (use a blow-up scan)")
    if not on_boundary(E, x, tol=1e-9):
        raise ValueError("evaluation point is not on the boundary of E")
    classification = "interior-curvature"
    if omega is not None and omega.sign(x) <= 0:
        classification = "interior-curvature(outside-domain)"
    radial = _radial_shell_dispatch(E, x, kernel)
    if radial is not None:
        return CurvatureReport(
            radial, tuple(x), IntegralResult(radial, 1e-12 * abs(radial), 0, "radial-exact"),
            classification,
        )
    axis = _symmetry_axis(E, x) if kernel.n == 3 else None
    res = pv_signed_kernel(E, x, kernel, cfg, axis=axis)
    return CurvatureReport(res.value, tuple(x), res, classification)


def _radial_shell_dispatch(E, x, kernel: KernelSpec):
    """Exact radial reduction for a centered annulus evaluated on its inner
    sphere (the extreme-ratio solver regime where generic quadrature loses
    precision)."""
    if kernel.kind != "fractional" or kernel.delta is not None:
        return None
    if not isinstance(E, Annulus) or any(c != 0.0 for c in E.center):
        return None
    r = math.sqrt(float(np.dot(x, x)))
    ratio = E.r_outer / E.r_inner
    if abs(r - E.r_inner) < 1e-12 * E.r_inner and ratio >= 2.5 and kernel.n in (2, 3):
        return kernel.c * E.r_inner ** (-kernel.s) * shell_curvature_raw(kernel.s, ratio, kernel.n)
    return None


def fb_defect(E, omega: Domain, x, kernel: KernelSpec, cfg: QuadConfig):
    """Free-boundary defect: the signed-indicator kernel mass of the domain.

    Defined for boundary points of E strictly outside the closure of the
    domain; there is no principal value (the integrand is bounded)."""
    x = np.asarray(x, dtype=float)
    if omega.exterior_distance(x) < _EXTERIOR_CLEARANCE:
        raise ClassificationError(
            "free-boundary defect needs a point strictly outside the domain closure"
        )
    if not on_boundary(E, x, tol=1e-9):
        raise ValueError("evaluation point is not on the boundary of E")
    radial = _radial_defect_dispatch(E, omega, x, kernel)
    if radial is not None:
        return CurvatureReport(
            radial, tuple(x), IntegralResult(radial, 1e-12 * abs(radial), 0, "radial-exact"),
            "exterior-defect",
        )
    axis = _symmetry_axis(E, x) if kernel.n == 3 else None
    res = pv_signed_kernel(E, x, kernel, cfg, omega=omega, axis=axis)
    return CurvatureReport(res.value, tuple(x), res, "exterior-defect")


def _radial_defect_dispatch(E, omega: Domain, x, kernel: KernelSpec):
    """Exact radial reduction for a centered annulus against a concentric
    ball domain (any exterior evaluation distance, including extreme ones)."""
    if kernel.kind != "fractional" or kernel.delta is not None or kernel.n not in (2, 3):
        return None
    if not isinstance(E, Annulus) or any(c != 0.0 for c in E.center):
        return None
    if not isinstance(omega.shape, Ball) or any(c != 0.0 for c in omega.shape.center):
        return None
    D = math.sqrt(float(np.dot(x, x)))
    R_om = omega.shape.radius
    if D <= R_om:
        return None
    s, n = kernel.s, kernel.n
    inner = min(E.r_inner, R_om)
    return kernel.c * (
        2.0 * ball_mass_from(D, inner, s, n=n) - ball_mass_from(D, R_om, s, n=n)
    )


def domain_kernel_mass(omega: Domain, x, kernel: KernelSpec, cfg: QuadConfig):
    """int_Omega K(x - y) dy for an exterior point x (exact ray segments)."""
    x = np.asarray(x, dtype=float)
    if omega.exterior_distance(x) <= 0:
        raise ClassificationError("kernel mass is evaluated at exterior points")

    def weight(pts):
        return (omega.sign(pts) > 0).astype(float)

    def crossing_fn(x0, dirs):
        return omega.shape.crossing_ts(x0, dirs)

    if kernel.n == 2:
        from .geometry import tangency_angles
        from .quadrature import paired_profile

        seeds = sorted(set(s % math.pi for s in omega.shape.seed_angles(x)))
        sing = sorted(set(s % math.pi for s in tangency_angles(omega.shape, x)))
        intervals = _wrap_intervals(sorted(set(seeds + sing)), 0.0, math.pi)

        def fvec(phis):
            dirs = _dirs_2d(phis)
            return paired_profile(weight, x, dirs, crossing_fn, kernel, check_origin=False)

        val, err, nev = integrate_angular(
            fvec, intervals, cfg.rel_tol, singular_angles=sing, grading=2.0,
            max_depth=cfg.max_depth,
        )
        return IntegralResult(val, err, nev, "rays")
    res = pv_signed_kernel(
        _FullSpace(omega.dim), x, kernel, cfg, omega=omega,
        axis=_symmetry_axis(omega.shape, x) if kernel.n == 3 else None,
    )
    return res


@dataclass(frozen=True)
class _FullSpace:
    dim: int

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        return -np.ones(pts.shape[:-1], dtype=int)

    def crossing_ts(self, x, dirs):
        return np.full((dirs.shape[0], 1), np.inf)

    def seed_angles(self, x):
        return []

    def singular_points(self):
        return np.zeros((0, self.dim))


# ---------------------------------------------------------------------------
# annulus functions (radial reduction: exact angular ray structure, no
# indicator evaluations, stable at extreme radius ratios)

from scipy.integrate import quad as _quad
from scipy.special import gamma as _gamma


def _abs_cos_power_integral(s: float) -> float:
    """int_0^pi |cos|^(-s) dphi, s in (0,1)."""
    return math.sqrt(math.pi) * _gamma((1.0 - s) / 2.0) / _gamma(1.0 - s / 2.0)


def shell_curvature_raw(s: float, R: float, n: int = 2) -> float:
    """Unnormalized curvature of B_R \\ B_1 at a point of the inner sphere.

    Paired-ray reduction: the inner-circle crossing sits at 2|cos| along the
    inward ray, the outer-circle exits at -+|cos| + sqrt(cos^2 + R^2 - 1);
    the inner term integrates in closed form.  Requires R large enough that
    the outer exits come after the inner crossing (R >= 2.5 is safe)."""
    if R < 2.5:
        raise ValueError("radial-reduced shell curvature needs R >= 2.5")
    q = R * R - 1.0

    if n == 2:
        def tau_part(phi):
            c = np.cos(phi)
            root = np.sqrt(c * c + q)
            return (root - np.abs(c)) ** (-s) + (root + np.abs(c)) ** (-s)

        smooth, _ = _quad(tau_part, 0.0, math.pi, limit=200, epsabs=1e-13, epsrel=1e-12)
        inner = 2.0 ** (-s) * _abs_cos_power_integral(s)
        return (2.0 / s) * (smooth - inner)
    if n == 3:
        def tau_part(g):
            c = np.cos(g)
            root = np.sqrt(c * c + q)
            return np.sin(g) * ((root - c) ** (-s) + (root + c) ** (-s))

        smooth, _ = _quad(tau_part, 0.0, math.pi / 2, limit=200, epsabs=1e-13, epsrel=1e-12)
        inner = 2.0 ** (-s) / (1.0 - s)
        return 2.0 * math.pi * (2.0 / s) * (smooth - inner)
    raise ValueError("shell curvature supports n in {2, 3}")


def ball_curvature_raw(s: float, n: int = 2) -> float:
    """Unnormalized curvature of the unit ball at a boundary point."""
    if n == 2:
        return (2.0 ** (1.0 - s) / s) * _abs_cos_power_integral(s)
    if n == 3:
        return 2.0 * math.pi * (2.0 ** (1.0 - s) / s) / (1.0 - s)
    raise ValueError("ball curvature supports n in {2, 3}")


def ball_mass_from(D: float, rho: float, s: float, n: int = 2) -> float:
    """int_{B_rho} |x - y|^(-n-s) dy for |x| = D > rho, cancellation-free.

    Factored as D^(-n-s) * int (1 - 2 q u + q^2)^(-(n+s)/2) with q = rho/D,
    so extreme distances lose no precision."""
    if D <= rho:
        raise ValueError("evaluation point must be outside the ball")
    p = (n + s) / 2.0
    xs, ws = np.polynomial.legendre.leggauss(48)

    if n == 2:
        def psi(q):
            # int_0^{2pi} (1 - 2 q cos + q^2)^(-p) dphi
            phi = math.pi * (0.5 + 0.5 * xs)
            vals = (1.0 - 2.0 * q[:, None] * np.cos(phi)[None, :] + q[:, None] ** 2) ** (-p)
            return 2.0 * (math.pi * 0.5) * np.sum(ws[None, :] * vals, axis=1)

        rr = 0.5 * rho + 0.5 * rho * xs
        wr = 0.5 * rho * ws
        out = float(np.sum(wr * rr * psi(rr / D)))
        return D ** (-(n + s)) * out
    if n == 3:
        # closed-form polar-angle integral
        def psi3(q):
            return (
                2.0
                * math.pi
                * ((1.0 - q) ** (-1.0 - s) - (1.0 + q) ** (-1.0 - s))
                / (q * (1.0 + s))
            )

        rr = 0.5 * rho + 0.5 * rho * xs
        wr = 0.5 * rho * ws
        out = float(np.sum(wr * rr * rr * psi3(rr / D)))
        return D ** (-(n + s)) * out
    raise ValueError("ball mass supports n in {2, 3}")


def annulus_curvature(s: float, R: float, cfg: QuadConfig, n: int = 2) -> float:
    """Curvature of the annulus B_R \\ B_1 at a point of the inner sphere."""
    if R <= 1.0 + 1e-6:
        raise ValueError("outer radius must exceed 1")
    k = KernelSpec(n, s)
    if R >= 2.5:
        return k.c * shell_curvature_raw(s, R, n=n)
    E = Annulus((0.0,) * n, 1.0, R)
    x = np.zeros(n)
    x[0] = 1.0
    return mean_curvature(E, x, k, cfg).value


def annulus_defect(s: float, r: float, Rstar: float, cfg: QuadConfig, n: int = 2) -> float:
    """Signed domain mass of the two-ball split, seen from R* r e_1.

    Computes  int_{B_1} (chi_{B_r} - chi_{B_r^c})(y) |R* r e_1 - y|^(-n-s) dy,
    without the kernel normalization (only the sign/root matters).
    """
    if not (0.0 < r < 1.0) or Rstar <= 1.0:
        raise ValueError("need r in (0,1) and Rstar > 1")
    if Rstar * r <= 1.0:
        raise ClassificationError("evaluation point R* r e_1 must lie outside the unit ball")
    D = Rstar * r
    return 2.0 * ball_mass_from(D, r, s, n=n) - ball_mass_from(D, 1.0, s, n=n)


# ---------------------------------------------------------------------------
# the s -> 1 angle density


def angle_density(psi: float, n: int, cfg: QuadConfig) -> float:
    """Weight g(psi) concentrating the free-boundary term on dE ∩ dOmega.

    g(psi) = int over {Z_1 < 0, Z_n in ((Z_1-1)/tan psi, (1-Z_1)/tan psi)}
    of |Z - e_1|^(-n-1) dZ, for psi in (0, pi/2].  The signed extension to
    psi > pi/2 is intentionally not provided.
    """
    if not (0.0 < psi <= math.pi / 2):
        raise ValueError("intersection angle must lie in (0, pi/2]; no signed extension")
    if n not in (2, 3):
        raise ValueError("angle density supports n in {2, 3}")
    if psi == math.pi / 2:
        return 0.0
    # band |Z_n| < (1 - Z_1)/tan(psi)  <=>  Z_1 + Z_n tan(psi) < 1 (both signs)
    tp = math.tan(psi)
    nrm = math.sqrt(1.0 + tp * tp)
    region = Intersection(
        (
            HalfSpace((1.0, 0.0), 0.0),
            HalfSpace((1.0 / nrm, tp / nrm), 1.0 / nrm),
            HalfSpace((1.0 / nrm, -tp / nrm), 1.0 / nrm),
        )
    )
    x = np.array([1.0, 0.0])

    def weight(pts):
        return (region.sign(pts) > 0).astype(float)

    def fvec(phis):
        dirs = _dirs_2d(phis)
        ts = _merge_crossings(region.crossing_ts(x, dirs))
        edges = np.concatenate([np.zeros((dirs.shape[0], 1)), ts], axis=1)
        w = _segment_signs(weight, x, dirs, edges)
        a = edges[:, :-1]
        b = np.where(np.isfinite(edges[:, 1:]), edges[:, 1:], np.inf)
        # radial mass of t^(n'-1) |t|^(-n'-1) = t^(-2): 1/a - 1/b
        with np.errstate(divide="ignore"):
            ia = np.where(a > 0, 1.0 / a, 0.0)
            ib = np.where(np.isfinite(b), 1.0 / b, 0.0)
        mass = np.where(b > a, ia - ib, 0.0)
        out = np.sum(np.where(a > 0, w * mass, 0.0), axis=1)
        # tail: beyond the last crossing
        finite = np.where(np.isfinite(ts), ts, 0.0)
        t_last = np.max(finite, axis=1)
        far = x[None, :] + (2 * t_last + 1.0)[:, None] * dirs
        w_tail = weight(far)
        out += np.where(t_last > 0, w_tail / np.maximum(t_last, 1e-300), 0.0)
        return out

    seeds = sorted(set(s % (2 * math.pi) for s in region.seed_angles(x)))
    intervals = _wrap_intervals(seeds, 0.0, 2 * math.pi)
    val, err, nev = adaptive_intervals(fvec, intervals, cfg.rel_tol, max_depth=cfg.max_depth)
    if n == 3:
        return (math.pi / 2.0) * val
    return val


# ---------------------------------------------------------------------------
# blow-up scans


@dataclass(frozen=True)
class ScanFit:
    exponent: float
    intercept: float
    sign: int
    dists: tuple
    values: tuple
    bounded: bool

    @property
    def prefactor(self):
        return math.exp(self.intercept)


def fit_power_law(dists, values, last: int = 6) -> ScanFit:
    """Least-squares fit of log|v| against log d on the last points of a scan."""
    dists = np.asarray(dists, dtype=float)
    values = np.asarray(values, dtype=float)
    if len(dists) < 4:
        raise ValueError("power-law fit needs at least 4 scan points")
    d = dists[-last:] if len(dists) > last else dists
    v = values[-last:] if len(values) > last else values
    if np.any(v == 0):
        return ScanFit(0.0, -math.inf, 0, tuple(dists), tuple(values), True)
    slope, intercept = np.polyfit(np.log(d), np.log(np.abs(v)), 1)
    sign = int(np.sign(v[-1]))
    return ScanFit(float(slope), float(intercept), sign, tuple(dists), tuple(values), False)


def kernel_mass_scan(omega: Domain, path, kernel: KernelSpec, cfg: QuadConfig) -> ScanFit:
    """Fit  log int_Omega K(x_k - .)  against  log dist(x_k, Omega)."""
    path = [np.asarray(p, dtype=float) for p in path]
    if len(path) < 4:
        raise ValueError("kernel-mass scan needs at least 4 path points")
    dists, masses = [], []
    for x in path:
        d = omega.exterior_distance(x)
        if d <= 0:
            raise ClassificationError("scan path must stay outside the domain")
        dists.append(d)
        masses.append(domain_kernel_mass(omega, x, kernel, cfg).value)
    return fit_power_law(dists, masses)


def corner_blowup_scan(E, path, s: float, cfg: QuadConfig) -> ScanFit:
    """Curvature blow-up along a smooth boundary branch approaching a corner.

    Path points are regular; only the limit point is singular.  Returns the
    fitted exponent of |H| against the distance to the corner and the sign of
    the divergence (sign 0 / bounded=True when the curvature stays bounded,
    as for equal tilts)."""
    path = [np.asarray(p, dtype=float) for p in path]
    k = KernelSpec(2, s)
    dists = [math.sqrt(float(p @ p)) for p in path]
    if min(dists) < 10 * _EXTERIOR_CLEARANCE:
        raise ValueError("scan path touches the corner")
    vals = [mean_curvature(E, p, k, cfg).value for p in path]
    scale = max(abs(v) for v in vals)
    if scale < 1e-8 or abs(vals[-1]) < 2.0 * abs(vals[0]):
        return ScanFit(0.0, -math.inf, int(np.sign(vals[-1])), tuple(dists), tuple(vals), True)
    return fit_power_law(dists, vals)


def tilted_defect_scan(theta: float, s: float, cfg: QuadConfig, rho0: float = 0.25,
                       n_points: int = 10) -> ScanFit:
    """Defect blow-up for a tilted interface crossing a flat domain boundary.

    Flat model: domain {x_1 > 0}, interface normal (-sin t, cos t); the path
    runs along the exterior boundary ray x_k = rho_k (-cos t, -sin t) with
    geometrically decreasing rho.  Tilt 0 must report boundedness."""
    if not (-math.pi / 2 < theta < math.pi / 2):
        raise ValueError("tilt must lie in (-pi/2, pi/2)")
    omega = Domain(HalfSpace((-1.0, 0.0), 0.0))
    E = HalfSpace((-math.sin(theta), math.cos(theta)), 0.0)
    varpi = np.array([-math.cos(theta), -math.sin(theta)])
    k = KernelSpec(2, s)
    rhos = [rho0 * 2.0 ** (-j) for j in range(n_points)]
    vals = [fb_defect(E, omega, rho * varpi, k, cfg).value for rho in rhos]
    dists = [rho * math.cos(theta) for rho in rhos]
    scale = max(abs(v) for v in vals)
    if theta == 0.0 or scale < 1e-10 or abs(vals[-1]) < 2.0 * abs(vals[0]):
        return ScanFit(0.0, -math.inf, int(np.sign(vals[-1])), tuple(dists), tuple(vals), True)
    return fit_power_law(dists, vals)
