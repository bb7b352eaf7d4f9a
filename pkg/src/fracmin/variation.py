"""Tangent vector fields, flows, and the first-variation identity.

The finite-difference side flows the set boundary with a classical one-step
integrator and re-evaluates the localized perimeter from the flowed boundary
curves (the boundary reduction needs only points, normals and line elements,
all of which transport through the flow map and its finite-difference
Jacobian).  The formula side integrates the nonlocal curvature over the
interior boundary and the free-boundary defect over the exterior boundary,
with graded nodes and an analytic near-contact stub absorbing the
dist^(-s) concentration at the contact set.
"""

from __future__ import annotations

from dataclasses import dataclass
import json
import math

import numpy as np

from .curvature import fb_defect, mean_curvature
from .geometry import (
    Ball,
    Complement,
    ConeSector2D,
    Domain,
    GeometryError,
    HalfSpace,
    Intersection,
    PieGlued,
    boundary_normal,
    boundary_sample,
    transversality_angle,
)
from .kernel import KernelSpec
from .perimeter import (
    PerimeterBreakdown,
    double_layer,
    far_mass_batch,
    perimeter_regions,
    smooth_star_integral,
)
from .quadrature import IntegralResult, QuadConfig, _gauss
from .geometry import Annulus, region_boundary_curves


class TangencyError(ValueError):
    pass


class TransversalityError(ValueError):
    pass


class FlowToleranceError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# tangent fields


def _quintic_step(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)


@dataclass(frozen=True)
class TangentField:
    """Compactly supported field tangent to the domain boundary.

    kinds: "rotation" (amplitude * eta(|x|) * M x, exactly tangent to every
    centered circle for any scalar cutoff), "bump" (a bump along a fixed
    direction vanishing outside a ball strictly inside the domain or
    entirely outside its closure), and "sum".
    """

    kind: str
    amplitude: float = 1.0
    plateau: float = 1.5
    support: float = 2.0
    direction: tuple = (1.0, 0.0)
    center: tuple = (0.0, 0.0)
    parts: tuple = ()

    def __call__(self, pts):
        pts = np.asarray(pts, dtype=float)
        if self.kind == "rotation":
            r = np.sqrt(np.sum(pts * pts, axis=-1))
            u = (r - self.plateau) / max(self.support - self.plateau, 1e-300)
            eta = 1.0 - _quintic_step(u)
            out = np.empty_like(pts)
            out[..., 0] = -pts[..., 1]
            out[..., 1] = pts[..., 0]
            return self.amplitude * eta[..., None] * out
        if self.kind == "bump":
            rel = pts - np.asarray(self.center)
            u = np.sum(rel * rel, axis=-1) / self.support**2
            prof = np.where(u < 1.0, (1.0 - np.minimum(u, 1.0)) ** 3, 0.0)
            return self.amplitude * prof[..., None] * np.asarray(self.direction)[None, :]
        if self.kind == "sum":
            return sum(p(pts) for p in self.parts)
        raise ValueError(f"unknown field kind {self.kind!r}")

    @property
    def support_radius(self):
        if self.kind == "rotation":
            return self.support
        if self.kind == "bump":
            return math.sqrt(float(np.sum(np.asarray(self.center) ** 2))) + self.support
        return max(p.support_radius for p in self.parts)

    def rigid_rotation_rate(self, radius):
        """Rotation rate if the flow restricted to B_radius is rigid, else None.

        Fields vanishing on the ball are rigid with rate 0."""
        if self.kind == "rotation":
            return self.amplitude if self.plateau >= radius else None
        if self.kind == "bump":
            d = math.sqrt(float(np.sum(np.asarray(self.center) ** 2)))
            return 0.0 if d - self.support >= radius else None
        if self.kind == "sum":
            total = 0.0
            for p in self.parts:
                r = p.rigid_rotation_rate(radius)
                if r is None:
                    return None
                total += r
            return total
        return None


def make_tangent_field(spec, omega: Domain, n_check=1000) -> TangentField:
    """Build a field from a spec dict and verify exact tangency on dOmega."""
    if isinstance(spec, TangentField):
        field = spec
    elif spec.get("kind") == "sum":
        field = TangentField(
            kind="sum",
            parts=tuple(make_tangent_field(p, omega, n_check=0) for p in spec["parts"]),
        )
    else:
        field = TangentField(**spec)
    if field.kind in ("bump",):
        _check_bump_clear(field, omega)
    if field.kind == "sum":
        for p in field.parts:
            if p.kind == "bump":
                _check_bump_clear(p, omega)
    if n_check:
        verify_tangency(field, omega, n_check)
    return field


def _check_bump_clear(field, omega):
    if not isinstance(omega.shape, Ball):
        return
    c = np.asarray(field.center) - np.asarray(omega.shape.center)
    d = math.sqrt(float(c @ c))
    R = omega.shape.radius
    inside = d + field.support <= R + 1e-12
    outside = d - field.support >= R - 1e-12
    if not (inside or outside):
        raise TangencyError("bump support crosses the domain boundary")


def verify_tangency(field, omega: Domain, n_check=1000, tol=1e-12):
    if isinstance(omega.shape, Ball):
        th = 2 * math.pi * (np.arange(n_check) + 0.5) / n_check
        pts = np.asarray(omega.shape.center)[None, :] + omega.shape.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=1
        )
        normals = (pts - np.asarray(omega.shape.center)[None, :]) / omega.shape.radius
    else:
        nu = np.asarray(omega.shape.normal)
        tau = np.array([-nu[1], nu[0]])
        ts = np.linspace(-10, 10, n_check)
        pts = omega.shape.offset * nu[None, :] + ts[:, None] * tau[None, :]
        normals = np.broadcast_to(nu, pts.shape)
    vals = field(pts)
    worst = float(np.max(np.abs(np.sum(vals * normals, axis=1))))
    if worst > tol:
        raise TangencyError(f"field is not tangent to the domain boundary: max |X.nu| = {worst:g}")
    return worst


# ---------------------------------------------------------------------------
# flows


@dataclass(frozen=True)
class Flow:
    field: TangentField
    t: float
    steps: int = 32

    def _integrate(self, pts, t):
        pts = np.array(pts, dtype=float)
        if t == 0.0:
            return pts
        dt = t / self.steps
        x = pts
        for _ in range(self.steps):
            k1 = self.field(x)
            k2 = self.field(x + 0.5 * dt * k1)
            k3 = self.field(x + 0.5 * dt * k2)
            k4 = self.field(x + dt * k3)
            x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        return x

    def map_points(self, pts):
        return self._integrate(pts, self.t)

    def unmap_points(self, pts):
        return self._integrate(pts, -self.t)

    def jacobians(self, pts, step=1e-5):
        """Finite-difference Jacobians of the forward map at base points."""
        pts = np.asarray(pts, dtype=float)
        n = pts.shape[0]
        stencil = np.concatenate(
            [
                pts + step * np.array([1.0, 0.0]),
                pts - step * np.array([1.0, 0.0]),
                pts + step * np.array([0.0, 1.0]),
                pts - step * np.array([0.0, 1.0]),
            ]
        )
        img = self.map_points(stencil)
        jx = (img[:n] - img[n : 2 * n]) / (2 * step)
        jy = (img[2 * n : 3 * n] - img[3 * n :]) / (2 * step)
        J = np.stack([jx, jy], axis=-1)  # J[i] columns: d(map)/dx, d(map)/dy
        return J

    def check_step_halving(self, probe_pts, tol=1e-8):
        a = self.map_points(probe_pts)
        b = Flow(self.field, self.t, 2 * self.steps).map_points(probe_pts)
        worst = float(np.max(np.sqrt(np.sum((a - b) ** 2, axis=1)))) if len(probe_pts) else 0.0
        if worst > tol:
            raise FlowToleranceError(f"flow integrator tolerance exceeded: {worst:g}")
        return worst


@dataclass(frozen=True)
class FlowedSet:
    base: object
    flow: Flow

    @property
    def dim(self):
        return self.base.dim

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        flat = pts.reshape(-1, pts.shape[-1])
        back = self.flow.unmap_points(flat)
        return self.base.sign(back.reshape(pts.shape))


def flow(E, X: TangentField, t: float, steps: int = 32, check=False) -> FlowedSet:
    f = Flow(X, t, steps)
    if check:
        probe = np.array([[0.3, 0.1], [0.9, -0.2], [-0.5, 0.7], [1.2, 0.4]])
        f.check_step_halving(probe)
    return FlowedSet(E, f)


class FlowedCurve:
    """A boundary curve transported by a flow map.

    Normals ride the inverse-transpose Jacobian; the line element picks up
    |J tangent|.  Evaluations are memoized per parameter layout (the pair
    quadrature revisits canonical node sets many times).  Touch/gap
    classification may use the base curve: the flow is a homeomorphism, so
    adjacency structure is preserved."""

    __slots__ = ("base", "flow", "_cache")

    def __init__(self, base, flow):
        self.base = base
        self.flow = flow
        self._cache = {}

    @property
    def length(self):
        return self.base.length  # nominal; quadrature uses speeds

    def at(self, taus):
        taus = np.asarray(taus, dtype=float)
        shape = taus.shape
        flat = taus.ravel()
        key = flat.tobytes()
        hit = self._cache.get(key)
        if hit is None:
            hit = self._evaluate(flat)
            if len(self._cache) < 64:
                self._cache[key] = hit
        img, ninv, spd = hit
        return img.reshape(shape + (2,)), ninv.reshape(shape + (2,)), spd.reshape(shape)

    def _evaluate(self, flat):
        pts, normals, speeds = self.base.at(flat)
        J = self.flow.jacobians(pts)
        img = self.flow.map_points(pts)
        tangents = np.stack([-normals[:, 1], normals[:, 0]], axis=1)
        Jt = np.einsum("nij,nj->ni", J, tangents)
        stretch = np.sqrt(np.sum(Jt * Jt, axis=1))
        # inverse-transpose in 2-d: [[d,-c],[-b,a]]/det applied to n=(nx,ny)
        a, b = J[:, 0, 0], J[:, 0, 1]
        c, d = J[:, 1, 0], J[:, 1, 1]
        det = a * d - b * c
        ninv = np.stack(
            [d * normals[:, 0] - c * normals[:, 1], -b * normals[:, 0] + a * normals[:, 1]],
            axis=1,
        ) / det[:, None]
        ninv /= np.sqrt(np.sum(ninv * ninv, axis=1))[:, None]
        return img, ninv, speeds * stretch

    def classify_proxy(self):
        return self.base

    def endpoints(self):
        p, _, _ = self.at(np.array([0.0, 1.0]))
        return p


# ---------------------------------------------------------------------------
# flowed perimeter and the finite-difference variation


def flowed_perimeter(E, omega: Domain, X: TangentField, kernel: KernelSpec,
                     cfg: QuadConfig, t: float, steps: int = 16,
                     skip_invariant=False):
    """Per_K(Phi_t(E); Omega) from flowed boundary curves.

    The flow preserves the domain and the truncation circle (its support is
    strictly inside), so every region of the three-term breakdown flows to a
    region bounded by flowed base curves.  Returns ``(breakdown, coarse)``
    where ``coarse`` is the same total at the lower quadrature resolution
    (its difference against the fine total estimates the non-canceling
    quadrature error of flow differences).  ``skip_invariant`` drops terms
    that are exactly flow invariant (for central differences).
    """
    if not omega.bounded:
        raise GeometryError("flowed perimeter needs a bounded domain")
    R = omega.shape.radius
    T = max(X.support_radius + 1.0, R + 4.0)
    fl = Flow(X, t, steps)
    rigid_rate = X.rigid_rotation_rate(R)
    pairs = perimeter_regions(E, omega)
    results = []
    coarse_total = 0.0
    for cell, (A, B) in enumerate(pairs):
        if cell == 0 and rigid_rate is not None:
            # rigid motion inside the domain: the in-in term is invariant
            if skip_invariant:
                results.append(IntegralResult(0.0, 0.0, 0, "invariant(skipped)"))
                continue
            from .perimeter import interaction

            res = interaction(A, B, kernel, cfg, cell=cell)
            results.append(res)
            coarse_total += res.value
            continue
        res, coarse = _flowed_interaction(A, B, kernel, cfg, fl, T, cell)
        results.append(res)
        coarse_total += coarse
    return PerimeterBreakdown(*results), coarse_total


def _field_rings(X: TangentField):
    """Circles across which the field transitions (support and plateau edges);
    curves are split there so moving pieces get their own quadrature panels."""
    if X.kind == "rotation":
        return [Ball((0.0, 0.0), X.plateau), Ball((0.0, 0.0), X.support)]
    if X.kind == "bump":
        return [Ball(tuple(X.center), X.support)]
    if X.kind == "sum":
        return [b for p in X.parts for b in _field_rings(p)]
    return []


def _split_curve_at_circles(curve, circles):
    from .geometry import ArcCurve, SegmentCurve, _circle_cross_angles, _line_cross_params

    pieces = [curve]
    for circ in circles:
        nxt = []
        for c in pieces:
            if isinstance(c, SegmentCurve):
                p0 = np.asarray(c.p0, dtype=float)
                d = np.asarray(c.p1, dtype=float) - p0
                L = math.sqrt(float(d @ d))
                ts = [
                    t / L
                    for t in _line_cross_params(p0, d / L, circ)
                    if 1e-9 < t / L < 1 - 1e-9
                ]
                cuts = sorted(ts)
                edges = [0.0] + cuts + [1.0]
                for a, b in zip(edges[:-1], edges[1:]):
                    nxt.append(
                        SegmentCurve(tuple(p0 + a * d), tuple(p0 + b * d), c.normal)
                    )
            elif isinstance(c, ArcCurve):
                angs = _circle_cross_angles(c.center, c.radius, circ)
                lo, hi = min(c.a0, c.a1), max(c.a0, c.a1)
                cuts = []
                for a in angs:
                    for shift in (-2 * math.pi, 0.0, 2 * math.pi):
                        q = a + shift
                        if lo + 1e-9 < q < hi - 1e-9:
                            cuts.append(q)
                edges = [c.a0] + sorted(cuts, reverse=c.a0 > c.a1) + [c.a1]
                for a, b in zip(edges[:-1], edges[1:]):
                    nxt.append(ArcCurve(c.center, c.radius, a, b, c.out_sign))
            else:
                nxt.append(c)
        pieces = nxt
    return pieces


def _wrap_moving(base_curve, fl: Flow):
    """Wrap in the flow only where the field can move points; pieces on which
    the field vanishes identically are kept as plain curves (the split points
    sit on field-support circles, where trajectories are fixed)."""
    pts, _, _ = base_curve.at(np.linspace(0.0, 1.0, 9))
    if float(np.max(np.abs(fl.field(pts)))) == 0.0:
        return base_curve
    return FlowedCurve(base_curve, fl)


def _flowed_interaction(A, B, kernel, cfg, fl: Flow, T, cell):
    ball = Ball((0.0, 0.0), T)
    b_bounded = cell == 0
    near_B = B if b_bounded else Intersection((B, ball))
    rings = _field_rings(fl.field)
    curves_a = [
        _wrap_moving(c, fl)
        for base in region_boundary_curves(A)
        for c in _split_curve_at_circles(base, rings)
    ]
    curves_b = [
        _wrap_moving(c, fl)
        for base in region_boundary_curves(near_B)
        for c in _split_curve_at_circles(base, rings)
    ]
    near = double_layer(curves_a, curves_b, kernel)
    near2 = double_layer(curves_a, curves_b, kernel, res=1.5)
    value = near2
    coarse = near
    err = abs(near - near2)
    nev = 0
    if not b_bounded:
        far_B = Intersection((B, Complement(ball)))
        # pull the flowed bounded side back: int_{A_t} psi = int_A |J| psi(Phi)
        def f(pts):
            J = fl.jacobians(pts)
            det = np.abs(J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0])
            img = fl.map_points(pts)
            return det * far_mass_batch(far_B, img, kernel)

        center = np.zeros(2)
        fv, fe, nev = smooth_star_integral(f, A, center)
        value += fv
        coarse += fv
        err += fe
    return IntegralResult(value, err, nev, "boundary-reduction(flowed)"), coarse


@dataclass(frozen=True)
class FDResult:
    value: float
    error: float
    flagged: bool
    coarse: float
    fine: float


def first_variation_fd(E, omega: Domain, X: TangentField, kernel: KernelSpec,
                       cfg: QuadConfig, h: float = 1e-2, steps: int = 8) -> FDResult:
    """Central difference of the flowed perimeter, with an h/2 Richardson check.

    All four evaluations share identical quadrature layouts on the fixed base
    curves, so layout error cancels in the differences; the non-canceling
    remainder is estimated by differencing the coarse-resolution totals."""
    if not (1e-3 <= h <= 5e-2):
        raise ValueError("finite-difference step must lie in [1e-3, 5e-2]")
    vals = {}
    coarse = {}
    for t in (h, -h, h / 2, -h / 2):
        bd, cv = flowed_perimeter(E, omega, X, kernel, cfg, t, steps=steps,
                                  skip_invariant=True)
        vals[t] = bd.total
        coarse[t] = cv
    fd1 = (vals[h] - vals[-h]) / (2 * h)
    fd2 = (vals[h / 2] - vals[-h / 2]) / h
    fd2_coarse = (coarse[h / 2] - coarse[-h / 2]) / h
    quad_err = abs(fd2 - fd2_coarse)
    scale = max(abs(fd1), abs(fd2), 1e-6)
    flagged = abs(fd1 - fd2) > max(5e-3 * scale, 3.0 * quad_err)
    value = (4.0 * fd2 - fd1) / 3.0
    return FDResult(value, abs(fd1 - fd2) / 3.0 + quad_err, flagged, fd1, fd2)


# ---------------------------------------------------------------------------
# the first-variation formula


@dataclass(frozen=True)
class Contact:
    point: np.ndarray
    psi: float
    margin: float
    exterior_dir: np.ndarray  # unit direction of the exterior branch at the contact
    branch: str


def contact_set(E, omega: Domain):
    """Transversal crossing points of dE with dOmega, plus sticking patches.

    Supported: half-space interfaces, off-domain circles, cone sectors,
    pie-glued sets (sticking circle), the domain itself (total stickiness),
    and annuli (no contact)."""
    if not isinstance(omega.shape, Ball):
        raise GeometryError("contact analysis needs a ball domain")
    c = np.asarray(omega.shape.center, dtype=float)
    R = omega.shape.radius
    contacts = []
    sticking = []
    if isinstance(E, Complement):
        inner = contact_set(E.base, omega)
        return inner
    if isinstance(E, HalfSpace):
        nu = np.asarray(E.normal)
        tau = np.array([-nu[1], nu[0]])
        d = E.offset - float(nu @ c)
        if abs(d) < R:
            half = math.sqrt(R * R - d * d)
            foot = c + d * nu
            for sgn in (+1.0, -1.0):
                p = foot + sgn * half * tau
                psi, margin = transversality_angle(E, omega, p)
                contacts.append(Contact(p, psi, margin, sgn * tau, f"line{sgn:+.0f}"))
        return contacts, sticking
    if isinstance(E, Ball):
        ce = np.asarray(E.center, dtype=float)
        dd = math.sqrt(float(np.sum((ce - c) ** 2)))
        if abs(E.radius - R) < 1e-12 and dd < 1e-12:
            sticking.append(("full-circle", omega.shape))
            return contacts, sticking
        if dd >= E.radius + R or dd <= abs(E.radius - R):
            return contacts, sticking
        cosb = (dd * dd + E.radius**2 - R * R) / (2 * dd * E.radius)
        beta = math.acos(max(-1.0, min(1.0, cosb)))
        base = math.atan2((c - ce)[1], (c - ce)[0])
        for sgn in (+1.0, -1.0):
            ang = base + sgn * beta
            p = ce + E.radius * np.array([math.cos(ang), math.sin(ang)])
            psi, margin = transversality_angle(E, omega, p)
            # exterior tangent direction: along the E-circle, away from Omega
            tau = np.array([-math.sin(ang), math.cos(ang)])
            if float((p + 1e-3 * tau - c) @ (p + 1e-3 * tau - c)) < R * R:
                tau = -tau
            contacts.append(Contact(p, psi, margin, tau, f"circle{sgn:+.0f}"))
        return contacts, sticking
    if isinstance(E, ConeSector2D):
        if float(c @ c) > 1e-24:
            raise GeometryError("sector contact analysis needs a centered domain")
        for j in range(2 * E.k):
            th = E.phase + j * math.pi / E.k
            d = np.array([math.cos(th), math.sin(th)])
            p = R * d
            psi, margin = transversality_angle(E, omega, p)
            contacts.append(Contact(p, psi, margin, d, f"ray{j}"))
        return contacts, sticking
    if isinstance(E, PieGlued):
        if abs(E.radius - R) > 1e-12:
            raise GeometryError("pie-glued contact analysis assumes gluing at dOmega")
        sticking.append(("glue-circle", omega.shape))
        if isinstance(E.inner, ConeSector2D):
            for j in range(2 * E.inner.k):
                th = E.inner.phase + j * math.pi / E.inner.k
                d = np.array([math.cos(th), math.sin(th)])
                contacts.append(Contact(R * d, math.pi / 2, 1.0, d, f"ray{j}"))
        return contacts, sticking
    if isinstance(E, Annulus):
        radii = (E.r_inner, E.r_outer)
        if all(abs(r - R) > 1e-9 for r in radii):
            return contacts, sticking
        raise GeometryError("annulus touches the domain boundary tangentially")
    raise GeometryError(f"no contact analysis for {type(E).__name__}")


@dataclass(frozen=True)
class FormulaResult:
    total: float
    interior: float
    exterior: float
    error: float
    interior_nodes: int
    exterior_nodes: int

    def to_json(self):
        return json.dumps(
            {
                "formula_interior": self.interior,
                "formula_exterior": self.exterior,
                "total": self.total,
                "error": self.error,
            }
        )


def _interior_term(E, omega, X, kernel, cfg, resolution):
    R = omega.shape.radius
    window = Ball(tuple(omega.shape.center), R * (1.0 - 1e-12))
    samples = boundary_sample(E, window, resolution)
    total = 0.0
    err = 0.0
    for smp in samples:
        xi = float(X(smp.point[None, :])[0] @ smp.normal)
        if xi == 0.0:
            continue
        rep = mean_curvature(E, smp.point, kernel, cfg)
        total += rep.value * xi * smp.weight
        err += rep.result.error_estimate * abs(xi) * smp.weight
    return total, err, len(samples)


def _exterior_branch_term(E, omega, X, kernel, cfg, contact: Contact, curve_point,
                          length, n_nodes=40, t_ref=2e-3, t_split=1e-6):
    """int_0^length A(x(t)) X.nu(x(t)) dt along one exterior branch.

    ``curve_point(t)`` parametrizes the branch by arclength-like t from the
    contact.  The dist^(-s) concentration at t = 0 is handled by a graded
    substitution plus an analytic stub below t_split with the coefficient
    extracted from two reference evaluations."""
    s = kernel.s

    def A_xi(ts):
        vals = np.empty(len(ts))
        errs = np.empty(len(ts))
        for i, t in enumerate(ts):
            p = curve_point(t)
            rep = fb_defect(E, omega, p, kernel, cfg)
            nrm = boundary_normal(E, p)
            xi = float(X(p[None, :])[0] @ nrm)
            vals[i] = rep.value * xi
            errs[i] = rep.result.error_estimate * abs(xi)
        return vals, errs

    # near-contact coefficient: A*xi ~ G t^(-s) + B
    (v1, e1), (v2, e2) = A_xi([t_ref]), A_xi([2 * t_ref])
    a1, a2 = t_ref**s, (2 * t_ref) ** s
    G = (v1[0] * a1 * a2 - v2[0] * a2 * a1) / (a2 - a1) if a2 != a1 else v1[0] * a1
    G = ((v1[0] * a1) * a2 - (v2[0] * a2) * a1) / (a2 - a1)
    stub = G * t_split ** (1.0 - s) / (1.0 - s)

    # graded main part: t = (tau)^(1/(1-s)) from t_split to length
    kappa = 1.0 / (1.0 - s)
    u0, u1 = t_split ** (1.0 - s), length ** (1.0 - s)
    xs, ws = _gauss(max(8, n_nodes // 4))
    total = stub
    err = abs(e1[0]) + abs(e2[0])
    panels = 4
    edges = np.linspace(u0, u1, panels + 1)
    for lo, hi in zip(edges[:-1], edges[1:]):
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        us = mid + half * xs
        ts = us**kappa
        vals, errs = A_xi(ts)
        jac = kappa * us ** (kappa - 1.0)
        total += half * float(np.sum(ws * vals * jac))
        err += half * float(np.sum(ws * errs * jac))
    return total, err, 2 + panels * len(xs)


def first_variation_formula(E, omega: Domain, X: TangentField, kernel: KernelSpec,
                            cfg: QuadConfig, resolution=0.05) -> FormulaResult:
    """Surface-integral side of the first-variation identity."""
    contacts, sticking = contact_set(E, omega)
    for ct in contacts:
        if ct.margin < 1e-3:
            raise TransversalityError(
                f"transversality margin {ct.margin:g} below 1e-3 at {tuple(ct.point)}"
            )
    for name, circle in sticking:
        th = 2 * math.pi * (np.arange(64) + 0.5) / 64
        pts = np.asarray(circle.center)[None, :] + circle.radius * np.stack(
            [np.cos(th), np.sin(th)], axis=1
        )
        normals = (pts - np.asarray(circle.center)[None, :]) / circle.radius
        worst = float(np.max(np.abs(np.sum(X(pts) * normals, axis=1))))
        if worst > 1e-12:
            raise TangencyError(f"sticking patch {name} sees a non-tangent field")

    if isinstance(E, Ball) and sticking:
        # total stickiness: both terms vanish identically
        return FormulaResult(0.0, 0.0, 0.0, 0.0, 0, 0)

    interior, int_err, n_int = _interior_term(E, omega, X, kernel, cfg, resolution)

    exterior = 0.0
    ext_err = 0.0
    n_ext = 0
    L = X.support_radius
    for ct in contacts:
        p0 = ct.point.copy()
        if isinstance(E, HalfSpace) or isinstance(E, ConeSector2D) or isinstance(E, PieGlued):
            d = ct.exterior_dir

            def curve_point(t, p0=p0, d=d):
                return p0 + t * d

            branch_len = max(L - math.sqrt(float(p0 @ p0)) + 1.0, 0.5)
        elif isinstance(E, Ball):
            ce = np.asarray(E.center, dtype=float)
            ang0 = math.atan2(p0[1] - ce[1], p0[0] - ce[0])
            tau = ct.exterior_dir
            rel = p0 - ce
            orient = 1.0 if (rel[0] * tau[1] - rel[1] * tau[0]) > 0 else -1.0

            def curve_point(t, ce=ce, ang0=ang0, orient=orient, rr=E.radius):
                a = ang0 + orient * t / rr
                return ce + rr * np.array([math.cos(a), math.sin(a)])

            branch_len = math.pi * E.radius * 0.98
        else:
            raise GeometryError(f"no exterior branch parametrization for {type(E).__name__}")
        val, err, used = _exterior_branch_term(
            E, omega, X, kernel, cfg, ct, curve_point, branch_len
        )
        exterior += val
        ext_err += err
        n_ext += used
    return FormulaResult(
        interior + exterior, interior, exterior, int_err + ext_err, n_int, n_ext
    )


# ---------------------------------------------------------------------------
# criticality residual


@dataclass(frozen=True)
class CriticalityReport:
    max_interior: float
    argmax_interior: tuple
    max_exterior: float
    argmax_exterior: tuple
    tolerance: float
    passed: bool
    mean_error: float


def criticality_residual(E, omega: Domain, kernel: KernelSpec, cfg: QuadConfig,
                         collar: float = 0.05, outer_radius: float = 3.0,
                         resolution: float = 0.1, tol_factor: float = 10.0) -> CriticalityReport:
    """Max |curvature| on dE inside the domain and max |defect| outside it.

    Nodes keep a collar around dOmega (where the defect legitimately blows
    up) and avoid corners; the configuration passes when both maxima stay
    below tol_factor times the mean reported integral error."""
    if not isinstance(omega.shape, Ball):
        raise GeometryError("criticality scan needs a ball domain")
    R = omega.shape.radius
    c = tuple(omega.shape.center)
    try:
        inner_samples = boundary_sample(E, Ball(c, R - collar), resolution)
    except Exception:
        inner_samples = []
    try:
        outer_samples = boundary_sample(E, Annulus(c, R + collar, outer_radius), resolution)
    except Exception:
        outer_samples = []

    max_h, arg_h = 0.0, (math.nan, math.nan)
    max_a, arg_a = 0.0, (math.nan, math.nan)
    err_sum, err_n = 0.0, 0
    for smp in inner_samples:
        rep = mean_curvature(E, smp.point, kernel, cfg)
        err_sum += rep.result.error_estimate
        err_n += 1
        if abs(rep.value) > max_h:
            max_h, arg_h = abs(rep.value), tuple(smp.point)
    for smp in outer_samples:
        rep = fb_defect(E, omega, smp.point, kernel, cfg)
        err_sum += rep.result.error_estimate
        err_n += 1
        if abs(rep.value) > max_a:
            max_a, arg_a = abs(rep.value), tuple(smp.point)
    mean_err = err_sum / max(err_n, 1)
    tol = tol_factor * max(mean_err, 1e-14)
    return CriticalityReport(
        max_h, arg_h, max_a, arg_a, tol, max_h <= tol and max_a <= tol, mean_err
    )
