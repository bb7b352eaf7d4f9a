"""Closed-form set geometry: indicators, ray crossings, boundary quadrature.

Every shape answers three questions exactly:

* which side of the set a point is on (``sign``: +1 inside, -1 outside,
  0 on the boundary),
* where a ray ``x + t d`` can cross the boundary (a closed-form superset of
  candidate parameters; spurious candidates are harmless because integrators
  re-evaluate the indicator on segment midpoints),
* how to place quadrature nodes with surface-measure weights on its boundary.

Shapes are immutable values and safe to share across workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.special import gamma

_APEX_HOLE = 1e-8  # no boundary nodes closer than this to a cone apex


class GeometryError(ValueError):
    pass


class UnsupportedRegionError(GeometryError):
    pass


def _unit(v):
    v = np.asarray(v, dtype=float)
    nrm = math.sqrt(float(np.dot(v, v)))
    if nrm == 0.0:
        raise GeometryError("zero vector cannot be normalized")
    return v / nrm


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / gamma(n / 2.0 + 1.0)


# ---------------------------------------------------------------------------
# shapes


@dataclass(frozen=True)
class HalfSpace:
    """{x : normal . x < offset} with unit normal."""

    normal: tuple
    offset: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "normal", tuple(_unit(self.normal)))

    @property
    def dim(self):
        return len(self.normal)

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        v = pts @ np.asarray(self.normal) - self.offset
        return np.sign(-v).astype(int)

    def crossing_ts(self, x, dirs):
        nu = np.asarray(self.normal)
        denom = dirs @ nu
        num = self.offset - float(np.dot(x, nu))
        scale = 1.0 + abs(self.offset) + float(np.max(np.abs(np.asarray(x, dtype=float))))
        if abs(num) <= 1e-13 * scale:
            # origin on the line: only the trivial crossing t = 0 exists
            return np.full((dirs.shape[0], 1), np.inf)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(denom) > 1e-300, num / denom, np.inf)
        t = np.where(t > 0, t, np.inf)
        return t[:, None]

    def seed_angles(self, x):
        th = math.atan2(self.normal[1], self.normal[0])
        return [th + math.pi / 2, th - math.pi / 2]

    def singular_points(self):
        return np.zeros((0, self.dim))


@dataclass(frozen=True)
class Ball:
    center: tuple
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise GeometryError("ball radius must be positive")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self):
        return len(self.center)

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        d2 = np.sum((pts - np.asarray(self.center)) ** 2, axis=-1)
        return np.sign(self.radius**2 - d2).astype(int)

    def crossing_ts(self, x, dirs):
        rel = np.asarray(x, dtype=float) - np.asarray(self.center)
        b = dirs @ rel
        q = float(np.dot(rel, rel)) - self.radius**2
        disc = b * b - q
        root = np.sqrt(np.maximum(disc, 0.0))
        t1 = np.where(disc > 0, -b - root, np.inf)
        t2 = np.where(disc > 0, -b + root, np.inf)
        ts = np.stack([t1, t2], axis=1)
        return np.where(ts > 1e-300, ts, np.inf)

    def seed_angles(self, x):
        rel = np.asarray(self.center) - np.asarray(x, dtype=float)
        d = math.sqrt(float(np.dot(rel, rel)))
        base = math.atan2(rel[1], rel[0])
        out = [base, base + math.pi]
        if d > self.radius:
            half = math.asin(min(1.0, self.radius / d))
            out += [base - half, base + half]
        return out

    def singular_points(self):
        return np.zeros((0, self.dim))


@dataclass(frozen=True)
class Annulus:
    center: tuple
    r_inner: float
    r_outer: float

    def __post_init__(self):
        if not (0 < self.r_inner < self.r_outer):
            raise GeometryError("annulus needs 0 < r_inner < r_outer")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))

    @property
    def dim(self):
        return len(self.center)

    def _balls(self):
        return Ball(self.center, self.r_inner), Ball(self.center, self.r_outer)

    def sign(self, pts):
        si = self._balls()[0].sign(pts)
        so = self._balls()[1].sign(pts)
        out = np.where((si < 0) & (so > 0), 1, -1)
        return np.where((si == 0) | (so == 0), 0, out)

    def crossing_ts(self, x, dirs):
        bi, bo = self._balls()
        return np.concatenate([bi.crossing_ts(x, dirs), bo.crossing_ts(x, dirs)], axis=1)

    def seed_angles(self, x):
        bi, bo = self._balls()
        return bi.seed_angles(x) + bo.seed_angles(x)

    def singular_points(self):
        return np.zeros((0, self.dim))


@dataclass(frozen=True)
class ConeSector2D:
    """Union of k equal sectors of angle pi/k: theta in (2j pi/k, (2j+1) pi/k)."""

    k: int
    phase: float = 0.0

    def __post_init__(self):
        if self.k < 1:
            raise GeometryError("sector count must be >= 1")

    @property
    def dim(self):
        return 2

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        ang = np.arctan2(pts[..., 1], pts[..., 0]) - self.phase
        u = ang / (math.pi / self.k)
        frac = u - np.floor(u)
        parity = np.mod(np.floor(u).astype(np.int64), 2)
        out = np.where(parity == 0, 1, -1)
        on_ray = frac == 0.0
        r2 = pts[..., 0] ** 2 + pts[..., 1] ** 2
        return np.where(on_ray | (r2 == 0.0), 0, out)

    def _lines(self):
        return [self.phase + j * math.pi / self.k for j in range(self.k)]

    def crossing_ts(self, x, dirs):
        cols = []
        for th in self._lines():
            nu = np.array([-math.sin(th), math.cos(th)])
            denom = dirs @ nu
            num = -float(np.dot(x, nu))
            if abs(num) <= 1e-13 * (1.0 + float(np.max(np.abs(np.asarray(x, dtype=float))))):
                cols.append(np.full(dirs.shape[0], np.inf))
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(np.abs(denom) > 1e-300, num / denom, np.inf)
            cols.append(np.where(t > 1e-300, t, np.inf))
        return np.stack(cols, axis=1)

    def seed_angles(self, x):
        out = []
        for th in self._lines():
            out += [th, th + math.pi]
        x = np.asarray(x, dtype=float)
        if np.dot(x, x) > 0:
            out.append(math.atan2(-x[1], -x[0]))  # toward the apex
        return out

    def singular_points(self):
        return np.zeros((1, 2))


@dataclass(frozen=True)
class PieGlued:
    """(inner ∩ B_R) ∪ (inner^c ∩ B_R^c): flips the inner set across |x| = R."""

    inner: object
    radius: float

    @property
    def dim(self):
        return self.inner.dim

    def _ball(self):
        return Ball((0.0,) * self.dim, self.radius)

    def sign(self, pts):
        si = self.inner.sign(pts)
        sb = self._ball().sign(pts)
        return np.where(sb == 0, 0, np.where(sb > 0, si, -si))

    def crossing_ts(self, x, dirs):
        return np.concatenate(
            [self.inner.crossing_ts(x, dirs), self._ball().crossing_ts(x, dirs)], axis=1
        )

    def seed_angles(self, x):
        return self.inner.seed_angles(x) + self._ball().seed_angles(x)

    def singular_points(self):
        pts = [self.inner.singular_points()]
        if isinstance(self.inner, ConeSector2D):
            k = self.inner.k
            ang = [self.inner.phase + j * math.pi / k for j in range(2 * k)]
            pts.append(self.radius * np.array([[math.cos(a), math.sin(a)] for a in ang]))
        return np.concatenate(pts, axis=0)


@dataclass(frozen=True)
class PlanarCornerPair:
    """Two half-plane wedges glued along {x1 = 0}.

    E = {x1 >= 0, w1.x < 0} ∪ {x1 < 0, w2.x < 0} with
    w_i = (-sin t_i, cos t_i), t_i in (-pi/2, pi/2).
    """

    theta1: float
    theta2: float

    def __post_init__(self):
        for t in (self.theta1, self.theta2):
            if not (-math.pi / 2 < t < math.pi / 2):
                raise GeometryError("corner tilts must lie in (-pi/2, pi/2)")

    @property
    def dim(self):
        return 2

    def _omegas(self):
        return (
            np.array([-math.sin(self.theta1), math.cos(self.theta1)]),
            np.array([-math.sin(self.theta2), math.cos(self.theta2)]),
        )

    def sign(self, pts):
        pts = np.asarray(pts, dtype=float)
        w1, w2 = self._omegas()
        v1 = pts @ w1
        v2 = pts @ w2
        x1 = pts[..., 0]
        inside = np.where(x1 >= 0, v1 < 0, v2 < 0)
        active = np.where(x1 >= 0, v1, v2)
        out = np.where(inside, 1, -1)
        return np.where((active == 0) | ((x1 == 0) & ((v1 < 0) != (v2 < 0))), 0, out)

    def crossing_ts(self, x, dirs):
        cols = []
        w1, w2 = self._omegas()
        for nu in (w1, w2, np.array([1.0, 0.0])):
            denom = dirs @ nu
            num = -float(np.dot(x, nu))
            if abs(num) <= 1e-13 * (1.0 + float(np.max(np.abs(np.asarray(x, dtype=float))))):
                cols.append(np.full(dirs.shape[0], np.inf))
                continue
            with np.errstate(divide="ignore", invalid="ignore"):
                t = np.where(np.abs(denom) > 1e-300, num / denom, np.inf)
            cols.append(np.where(t > 1e-300, t, np.inf))
        return np.stack(cols, axis=1)

    def seed_angles(self, x):
        out = [math.pi / 2, -math.pi / 2]
        for th in (self.theta1, self.theta2):
            out += [th, th + math.pi]
        x = np.asarray(x, dtype=float)
        if np.dot(x, x) > 0:
            out.append(math.atan2(-x[1], -x[0]))
        return out

    def singular_points(self):
        return np.zeros((1, 2))


@dataclass(frozen=True)
class LawsonCone:
    """{(x,y) in R^n x R^m : |x| < alpha |y|}."""

    n: int
    m: int
    alpha: float

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise GeometryError("cone factors need n, m >= 1")
        if self.alpha <= 0:
            raise GeometryError("cone opening must be positive")

    @property
    def dim(self):
        return self.n + self.m

    def _split(self, pts):
        pts = np.asarray(pts, dtype=float)
        return pts[..., : self.n], pts[..., self.n :]

    def sign(self, pts):
        xs, ys = self._split(pts)
        v = np.sum(xs * xs, axis=-1) - self.alpha**2 * np.sum(ys * ys, axis=-1)
        return np.sign(-v).astype(int)

    def crossing_ts(self, x, dirs):
        x = np.asarray(x, dtype=float)
        dx, dy = dirs[:, : self.n], dirs[:, self.n :]
        xx, xy = x[: self.n], x[self.n :]
        a2 = self.alpha**2
        A = np.sum(dx * dx, axis=1) - a2 * np.sum(dy * dy, axis=1)
        B = 2.0 * (dx @ xx - a2 * (dy @ xy))
        C = float(np.dot(xx, xx) - a2 * np.dot(xy, xy))
        disc = B * B - 4.0 * A * C
        root = np.sqrt(np.maximum(disc, 0.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            t1 = np.where((disc > 0) & (np.abs(A) > 1e-300), (-B - root) / (2 * A), np.inf)
            t2 = np.where((disc > 0) & (np.abs(A) > 1e-300), (-B + root) / (2 * A), np.inf)
            tl = np.where((np.abs(A) <= 1e-300) & (np.abs(B) > 1e-300), -C / B, np.inf)
        ts = np.stack([t1, t2, tl], axis=1)
        return np.where(ts > 1e-300, ts, np.inf)

    def seed_angles(self, x):
        if self.dim != 2:
            return []
        half = math.atan(self.alpha)
        out = []
        for base in (math.pi / 2, -math.pi / 2):
            out += [base - half, base + half, base - half + math.pi, base + half + math.pi]
        return out

    def singular_points(self):
        return np.zeros((1, self.dim))


@dataclass(frozen=True)
class Complement:
    base: object

    @property
    def dim(self):
        return self.base.dim

    def sign(self, pts):
        return -self.base.sign(pts)

    def crossing_ts(self, x, dirs):
        return self.base.crossing_ts(x, dirs)

    def seed_angles(self, x):
        return self.base.seed_angles(x)

    def singular_points(self):
        return self.base.singular_points()


@dataclass(frozen=True)
class Union:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def dim(self):
        return self.parts[0].dim

    def sign(self, pts):
        signs = np.stack([p.sign(pts) for p in self.parts], axis=0)
        out = np.where(np.any(signs > 0, axis=0), 1, -1)
        return np.where((out < 0) & np.any(signs == 0, axis=0), 0, out)

    def crossing_ts(self, x, dirs):
        return np.concatenate([p.crossing_ts(x, dirs) for p in self.parts], axis=1)

    def seed_angles(self, x):
        return [a for p in self.parts for a in p.seed_angles(x)]

    def singular_points(self):
        return np.concatenate([p.singular_points() for p in self.parts], axis=0)


@dataclass(frozen=True)
class Intersection:
    parts: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def dim(self):
        return self.parts[0].dim

    def sign(self, pts):
        signs = np.stack([p.sign(pts) for p in self.parts], axis=0)
        out = np.where(np.all(signs > 0, axis=0), 1, -1)
        return np.where((out < 0) & ~np.any(signs < 0, axis=0), 0, out)

    def crossing_ts(self, x, dirs):
        return np.concatenate([p.crossing_ts(x, dirs) for p in self.parts], axis=1)

    def seed_angles(self, x):
        return [a for p in self.parts for a in p.seed_angles(x)]

    def singular_points(self):
        return np.concatenate([p.singular_points() for p in self.parts], axis=0)


# ---------------------------------------------------------------------------
# reference domain


@dataclass(frozen=True)
class Domain:
    """Reference open set: a ball or a half-space, with a tubular radius."""

    shape: object
    tubular: float = 0.1

    def __post_init__(self):
        if not isinstance(self.shape, (Ball, HalfSpace)):
            raise GeometryError("domain must be a ball or a half-space")
        if self.tubular <= 0:
            raise GeometryError("tubular radius must be positive")

    @property
    def dim(self):
        return self.shape.dim

    @property
    def bounded(self):
        return isinstance(self.shape, Ball)

    def sign(self, pts):
        return self.shape.sign(pts)

    def exterior_distance(self, x):
        """dist(x, closure of the domain); 0 inside."""
        x = np.asarray(x, dtype=float)
        if isinstance(self.shape, Ball):
            d = math.sqrt(float(np.sum((x - np.asarray(self.shape.center)) ** 2)))
            return max(0.0, d - self.shape.radius)
        v = float(x @ np.asarray(self.shape.normal)) - self.shape.offset
        return max(0.0, v)

    def boundary_projection(self, x):
        x = np.asarray(x, dtype=float)
        if isinstance(self.shape, Ball):
            c = np.asarray(self.shape.center)
            return c + self.shape.radius * _unit(x - c)
        nu = np.asarray(self.shape.normal)
        return x - (float(x @ nu) - self.shape.offset) * nu

    def boundary_normal(self, x):
        if isinstance(self.shape, Ball):
            return _unit(np.asarray(x, dtype=float) - np.asarray(self.shape.center))
        return np.asarray(self.shape.normal)

    def volume(self):
        if not self.bounded:
            raise UnsupportedRegionError("half-space domain has infinite volume")
        return unit_ball_volume(self.dim) * self.shape.radius**self.dim


# ---------------------------------------------------------------------------
# point queries


def indicator(E, x):
    """+1 inside, -1 outside, 0 for an exact boundary hit."""
    x = np.asarray(x, dtype=float)
    return E.sign(x)


def boundary_normal(E, x, step=1e-7):
    """Outward unit normal of E at a regular boundary point.

    The direction comes from the closest primitive; the orientation is fixed
    by probing the exact indicator on both sides.
    """
    x = np.asarray(x, dtype=float)
    n = _primitive_normal(E, x)
    probe = np.stack([x + step * n, x - step * n])
    s = E.sign(probe)
    if s[0] == -1 and s[1] == 1:
        return n
    if s[0] == 1 and s[1] == -1:
        return -n
    raise GeometryError(f"point {x} does not sit on a two-sided boundary of {E}")


def _primitive_normal(E, x):
    """Unoriented normal direction of the nearest boundary primitive."""
    if isinstance(E, Complement):
        return _primitive_normal(E.base, x)
    if isinstance(E, Ball):
        return _unit(x - np.asarray(E.center))
    if isinstance(E, Annulus):
        r = math.sqrt(float(np.sum((x - np.asarray(E.center)) ** 2)))
        return _unit(x - np.asarray(E.center))
    if isinstance(E, HalfSpace):
        return np.asarray(E.normal)
    if isinstance(E, ConeSector2D):
        ths = [E.phase + j * math.pi / E.k for j in range(E.k)]
        best = min(ths, key=lambda th: abs(-math.sin(th) * x[0] + math.cos(th) * x[1]))
        return np.array([-math.sin(best), math.cos(best)])
    if isinstance(E, PlanarCornerPair):
        w1, w2 = E._omegas()
        return w1 if abs(float(x @ w1)) <= abs(float(x @ w2)) else w2
    if isinstance(E, PieGlued):
        r = math.sqrt(float(np.dot(x, x)))
        if abs(r - E.radius) < _dist_to_primitives(E.inner, x):
            return _unit(x)
        return _primitive_normal(E.inner, x)
    if isinstance(E, LawsonCone):
        xs, ys = x[: E.n], x[E.n :]
        g = np.concatenate([2 * xs, -2 * E.alpha**2 * ys])
        return _unit(g)
    if isinstance(E, (Union, Intersection)):
        best = min(E.parts, key=lambda p: _dist_to_primitives(p, x))
        return _primitive_normal(best, x)
    raise GeometryError(f"no boundary normal for {type(E).__name__}")


def _dist_to_primitives(E, x):
    """Distance from x to the candidate boundary curves (a superset of dE)."""
    x = np.asarray(x, dtype=float)
    if isinstance(E, Complement):
        return _dist_to_primitives(E.base, x)
    if isinstance(E, Ball):
        return abs(math.sqrt(float(np.sum((x - np.asarray(E.center)) ** 2))) - E.radius)
    if isinstance(E, Annulus):
        r = math.sqrt(float(np.sum((x - np.asarray(E.center)) ** 2)))
        return min(abs(r - E.r_inner), abs(r - E.r_outer))
    if isinstance(E, HalfSpace):
        return abs(float(x @ np.asarray(E.normal)) - E.offset)
    if isinstance(E, ConeSector2D):
        ths = [E.phase + j * math.pi / E.k for j in range(E.k)]
        return min(abs(-math.sin(th) * x[0] + math.cos(th) * x[1]) for th in ths)
    if isinstance(E, PlanarCornerPair):
        w1, w2 = E._omegas()
        return min(abs(float(x @ w1)), abs(float(x @ w2)))
    if isinstance(E, PieGlued):
        r = math.sqrt(float(np.dot(x, x)))
        return min(abs(r - E.radius), _dist_to_primitives(E.inner, x))
    if isinstance(E, LawsonCone):
        xs, ys = x[: E.n], x[E.n :]
        return abs(math.sqrt(float(xs @ xs)) - E.alpha * math.sqrt(float(ys @ ys))) / math.sqrt(
            1 + E.alpha**2
        )
    if isinstance(E, (Union, Intersection)):
        return min(_dist_to_primitives(p, x) for p in E.parts)
    raise GeometryError(f"no distance for {type(E).__name__}")


def on_boundary(E, x, tol=1e-9):
    return _dist_to_primitives(E, x) <= tol and _is_two_sided(E, x)


def _is_two_sided(E, x, step=1e-7):
    x = np.asarray(x, dtype=float)
    try:
        n = _primitive_normal(E, x)
    except GeometryError:
        return False
    s = E.sign(np.stack([x + step * n, x - step * n]))
    return int(s[0]) * int(s[1]) == -1


def tangency_angles(E, x):
    """Directions (2-d angles) at which rays from x graze a circle primitive.

    The angular profile of a ray-decomposed kernel integral is singular (or
    has a root-type kink) exactly at these directions.
    """
    x = np.asarray(x, dtype=float)
    out = []
    if isinstance(E, Ball):
        rel = np.asarray(E.center) - x
        d = math.sqrt(float(rel @ rel))
        if d > 1e-14:
            base = math.atan2(rel[1], rel[0])
            if abs(d - E.radius) < 1e-12:
                out += [base + math.pi / 2, base - math.pi / 2]
            elif d > E.radius:
                half = math.asin(min(1.0, E.radius / d))
                out += [base - half, base + half]
    elif isinstance(E, Annulus):
        bi, bo = E._balls()
        out += tangency_angles(bi, x) + tangency_angles(bo, x)
    elif isinstance(E, PieGlued):
        out += tangency_angles(E.inner, x) + tangency_angles(E._ball(), x)
    elif isinstance(E, Complement):
        out += tangency_angles(E.base, x)
    elif isinstance(E, (Union, Intersection)):
        for p in E.parts:
            out += tangency_angles(p, x)
    return out


def nearest_singular_distance(E, x):
    pts = E.singular_points() if hasattr(E, "singular_points") else np.zeros((0, len(x)))
    if len(pts) == 0:
        return math.inf
    return float(np.min(np.sqrt(np.sum((pts - np.asarray(x, dtype=float)) ** 2, axis=1))))


# ---------------------------------------------------------------------------
# boundary quadrature


@dataclass(frozen=True)
class SurfaceSample:
    point: np.ndarray
    normal: np.ndarray
    weight: float
    patch: str


def _gauss_panel_nodes(a, b, n_panels, order=10):
    """Composite Gauss-Legendre nodes/weights on [a, b]."""
    xs, ws = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(a, b, n_panels + 1)
    mid = 0.5 * (edges[:-1] + edges[1:])[:, None]
    half = 0.5 * (edges[1:] - edges[:-1])[:, None]
    nodes = (mid + half * xs[None, :]).ravel()
    weights = (half * ws[None, :]).ravel()
    return nodes, weights


def _window_interval_circle(center, radius, window):
    """Angle intervals of the circle |x-c|=r lying inside the window shape."""
    c = np.asarray(center, dtype=float)
    if isinstance(window, Ball):
        cw = np.asarray(window.center, dtype=float)
        d = math.sqrt(float(np.sum((c - cw) ** 2)))
        if d + radius <= window.radius:
            return [(0.0, 2 * math.pi)]
        if d - radius >= window.radius or d >= window.radius + radius:
            return []
        if d + window.radius <= radius:
            return []  # the window sits inside the circle's hole
        cosd = (d * d + radius * radius - window.radius**2) / (2 * d * radius)
        cosd = min(1.0, max(-1.0, cosd))
        half = math.acos(cosd)
        base = math.atan2(cw[1] - c[1], cw[0] - c[0])
        return [(base - half, base + half)]
    if isinstance(window, Annulus):
        outer = _window_interval_circle(center, radius, Ball(window.center, window.r_outer))
        inner = _window_interval_circle(center, radius, Ball(window.center, window.r_inner))
        return _subtract_intervals(outer, inner)
    raise UnsupportedRegionError("window must be a ball or an annulus")


def _subtract_intervals(keep, drop):
    out = []
    for a, b in keep:
        pieces = [(a, b)]
        for c, d in drop:
            nxt = []
            for p, q in pieces:
                # wrap drop interval into the same branch as (p,q)
                for shift in (-2 * math.pi, 0.0, 2 * math.pi):
                    cc, dd = c + shift, d + shift
                    if dd <= p or cc >= q:
                        continue
                    if cc > p:
                        nxt.append((p, cc))
                    if dd < q:
                        p = dd
                        continue
                    p = q
                if p < q:
                    nxt.append((p, q))
                    p = q
            pieces = [(p, q) for p, q in nxt if q - p > 1e-14]
        out += pieces
    return out


def _segment_window_clip(p0, d, window, t_lo, t_hi):
    """Clip the parametrized line p0 + t d to the window; list of (a, b)."""
    if isinstance(window, Ball):
        rel = p0 - np.asarray(window.center)
        b = float(d @ rel)
        q = float(rel @ rel) - window.radius**2
        disc = b * b - q
        if disc <= 0:
            return []
        r = math.sqrt(disc)
        a, bb = -b - r, -b + r
        lo, hi = max(a, t_lo), min(bb, t_hi)
        return [(lo, hi)] if hi > lo else []
    if isinstance(window, Annulus):
        outer = _segment_window_clip(p0, d, Ball(window.center, window.r_outer), t_lo, t_hi)
        inner = _segment_window_clip(p0, d, Ball(window.center, window.r_inner), t_lo, t_hi)
        out = []
        for a, b in outer:
            segs = [(a, b)]
            for c, dd in inner:
                segs = [
                    piece
                    for lo, hi in segs
                    for piece in (((lo, min(hi, c)),) if lo < c else ())
                    + (((max(lo, dd), hi),) if hi > dd else ())
                    if piece[1] > piece[0]
                ]
            out += segs
        return out
    raise UnsupportedRegionError("window must be a ball or an annulus")


def _arc_samples(E, center, radius, intervals, resolution, patch):
    out = []
    c = np.asarray(center, dtype=float)
    for a, b in intervals:
        length = radius * (b - a)
        if length <= 0:
            continue
        n_panels = max(1, int(math.ceil(length / max(resolution, 1e-12) / 10.0)))
        ang, w = _gauss_panel_nodes(a, b, n_panels)
        for t, wt in zip(ang, w):
            p = c + radius * np.array([math.cos(t), math.sin(t)])
            try:
                nrm = boundary_normal(E, p)
            except GeometryError:
                continue
            out.append(SurfaceSample(p, nrm, wt * radius, patch))
    return out


def _line_samples(E, p0, d, spans, resolution, patch):
    out = []
    for a, b in spans:
        length = b - a
        if length <= 0:
            continue
        n_panels = max(1, int(math.ceil(length / max(resolution, 1e-12) / 10.0)))
        ts, w = _gauss_panel_nodes(a, b, n_panels)
        for t, wt in zip(ts, w):
            p = p0 + t * d
            try:
                nrm = boundary_normal(E, p)
            except GeometryError:
                continue
            out.append(SurfaceSample(p, nrm, wt, patch))
    return out


def _sphere_samples(E, center, radius, resolution, patch):
    """Product Gauss x trapezoid nodes on a full 2-sphere (n = 3)."""
    c = np.asarray(center, dtype=float)
    n_u = max(4, int(math.ceil(math.pi * radius / max(resolution, 1e-12))))
    n_v = 2 * n_u
    us, wu = np.polynomial.legendre.leggauss(n_u)  # u = cos(theta)
    vs = 2 * math.pi * (np.arange(n_v) + 0.5) / n_v
    out = []
    for u, wui in zip(us, wu):
        st = math.sqrt(max(0.0, 1 - u * u))
        for v in vs:
            p = c + radius * np.array([st * math.cos(v), st * math.sin(v), u])
            nrm = boundary_normal(E, p)
            out.append(SurfaceSample(p, nrm, wui * (2 * math.pi / n_v) * radius**2, patch))
    return out


def boundary_sample(E, window, resolution):
    """Quadrature nodes on dE ∩ window with surface-measure weights.

    The window is a Ball or an Annulus.  Corner points (apexes, glue corners)
    are never emitted; sector rays keep a small hole around the apex.
    """
    dim = E.dim
    if isinstance(E, Complement):
        return [
            SurfaceSample(s.point, -s.normal, s.weight, s.patch)
            for s in boundary_sample(E.base, window, resolution)
        ]
    if isinstance(E, Ball):
        if dim == 2:
            iv = _window_interval_circle(E.center, E.radius, window)
            return _arc_samples(E, E.center, E.radius, iv, resolution, "circle")
        if dim == 3 and isinstance(window, Ball):
            if (
                math.sqrt(float(np.sum((np.asarray(E.center) - np.asarray(window.center)) ** 2)))
                + E.radius
                <= window.radius
            ):
                return _sphere_samples(E, E.center, E.radius, resolution, "sphere")
        raise UnsupportedRegionError("3-d ball sampling needs a containing ball window")
    if isinstance(E, Annulus):
        out = []
        for r, patch in ((E.r_inner, "inner-circle"), (E.r_outer, "outer-circle")):
            if dim == 2:
                iv = _window_interval_circle(E.center, r, window)
                out += _arc_samples(E, E.center, r, iv, resolution, patch)
            elif dim == 3 and isinstance(window, Ball):
                d = math.sqrt(
                    float(np.sum((np.asarray(E.center) - np.asarray(window.center)) ** 2))
                )
                if d + r <= window.radius:
                    out += _sphere_samples(E, E.center, r, resolution, patch)
            else:
                raise UnsupportedRegionError("annulus sampling supports n in {2,3}")
        return out
    if isinstance(E, HalfSpace):
        if dim != 2:
            raise UnsupportedRegionError("half-space sampling is 2-d")
        nu = np.asarray(E.normal)
        d = np.array([-nu[1], nu[0]])
        p0 = E.offset * nu
        spans = _segment_window_clip(p0, d, window, -1e9, 1e9)
        return _line_samples(E, p0, d, spans, resolution, "line")
    if isinstance(E, ConeSector2D):
        out = []
        for j in range(2 * E.k):
            th = E.phase + j * math.pi / E.k
            d = np.array([math.cos(th), math.sin(th)])
            spans = _segment_window_clip(np.zeros(2), d, window, _APEX_HOLE, 1e9)
            out += _line_samples(E, np.zeros(2), d, spans, resolution, f"ray{j}")
        return out
    if isinstance(E, PlanarCornerPair):
        out = []
        d1 = np.array([math.cos(E.theta1), math.sin(E.theta1)])
        d2 = -np.array([math.cos(E.theta2), math.sin(E.theta2)])
        for d, patch in ((d1, "branch1"), (d2, "branch2")):
            spans = _segment_window_clip(np.zeros(2), d, window, _APEX_HOLE, 1e9)
            out += _line_samples(E, np.zeros(2), d, spans, resolution, patch)
        return out
    if isinstance(E, PieGlued):
        out = []
        if isinstance(E.inner, ConeSector2D):
            k = E.inner.k
            for j in range(2 * k):
                th = E.inner.phase + j * math.pi / k
                d = np.array([math.cos(th), math.sin(th)])
                spans = _segment_window_clip(np.zeros(2), d, window, _APEX_HOLE, 1e9)
                spans = [
                    piece
                    for a, b in spans
                    for piece in ((a, min(b, E.radius - _APEX_HOLE)), (max(a, E.radius + _APEX_HOLE), b))
                    if piece[1] > piece[0]
                ]
                out += _line_samples(E, np.zeros(2), d, spans, resolution, f"ray{j}")
        elif isinstance(E.inner, HalfSpace):
            nu = np.asarray(E.inner.normal)
            d = np.array([-nu[1], nu[0]])
            p0 = E.inner.offset * nu
            spans = _segment_window_clip(p0, d, window, -1e9, 1e9)
            out += _line_samples(E, p0, d, spans, resolution, "line")
        else:
            raise UnsupportedRegionError("pie gluing supports sector or half-space interiors")
        iv = _window_interval_circle((0.0,) * dim, E.radius, window)
        out += _arc_samples(E, (0.0, 0.0), E.radius, iv, resolution, "glue-circle")
        return out
    if isinstance(E, LawsonCone) and E.dim == 2:
        out = []
        for sx in (1.0, -1.0):
            for sy in (1.0, -1.0):
                d = _unit(np.array([sx * E.alpha, sy * 1.0]))
                spans = _segment_window_clip(np.zeros(2), d, window, _APEX_HOLE, 1e9)
                out += _line_samples(E, np.zeros(2), d, spans, resolution, f"edge{sx:+.0f}{sy:+.0f}")
        return out
    raise UnsupportedRegionError(f"no boundary sampler for {type(E).__name__}")


# ---------------------------------------------------------------------------
# boundary curves of composite regions (for double-layer interaction integrals)


@dataclass(frozen=True)
class ArcCurve:
    """Circle arc with outward normal ``out_sign * radial``; param tau in [0,1]."""

    center: tuple
    radius: float
    a0: float
    a1: float
    out_sign: float

    @property
    def length(self):
        return self.radius * abs(self.a1 - self.a0)

    def at(self, taus):
        taus = np.asarray(taus, dtype=float)
        ang = self.a0 + (self.a1 - self.a0) * taus
        e = np.stack([np.cos(ang), np.sin(ang)], axis=-1)
        pts = np.asarray(self.center)[None, :] + self.radius * e
        normals = self.out_sign * e
        speeds = np.full(taus.shape, self.length)
        return pts, normals, speeds

    def endpoints(self):
        p, _, _ = self.at(np.array([0.0, 1.0]))
        return p


@dataclass(frozen=True)
class SegmentCurve:
    p0: tuple
    p1: tuple
    normal: tuple

    @property
    def length(self):
        d = np.asarray(self.p1) - np.asarray(self.p0)
        return math.sqrt(float(d @ d))

    def at(self, taus):
        taus = np.asarray(taus, dtype=float)
        p0 = np.asarray(self.p0, dtype=float)
        p1 = np.asarray(self.p1, dtype=float)
        pts = p0[None, :] + taus[..., None] * (p1 - p0)[None, :]
        normals = np.broadcast_to(np.asarray(self.normal, dtype=float), pts.shape).copy()
        speeds = np.full(taus.shape, self.length)
        return pts, normals, speeds

    def endpoints(self):
        return np.stack([np.asarray(self.p0, dtype=float), np.asarray(self.p1, dtype=float)])


def shape_primitives(shape, out=None):
    """Flat list of boundary primitives (balls and half-space lines)."""
    if out is None:
        out = []
    if isinstance(shape, (Ball, HalfSpace)):
        out.append(shape)
    elif isinstance(shape, Annulus):
        out.append(Ball(shape.center, shape.r_inner))
        out.append(Ball(shape.center, shape.r_outer))
    elif isinstance(shape, PieGlued):
        shape_primitives(shape.inner, out)
        out.append(shape._ball())
    elif isinstance(shape, Complement):
        shape_primitives(shape.base, out)
    elif isinstance(shape, (Union, Intersection)):
        for p in shape.parts:
            shape_primitives(p, out)
    elif isinstance(shape, ConeSector2D):
        for th in shape._lines():
            out.append(HalfSpace((-math.sin(th), math.cos(th)), 0.0))
    elif isinstance(shape, PlanarCornerPair):
        w1, w2 = shape._omegas()
        out.append(HalfSpace(tuple(w1), 0.0))
        out.append(HalfSpace(tuple(w2), 0.0))
        out.append(HalfSpace((1.0, 0.0), 0.0))
    else:
        raise GeometryError(f"no primitive inventory for {type(shape).__name__}")
    return out


def _circle_cross_angles(center, R, prim):
    """Angles at which the circle |x-c|=R meets the primitive's boundary."""
    c = np.asarray(center, dtype=float)
    if isinstance(prim, Ball):
        d = np.asarray(prim.center) - c
        dist = math.sqrt(float(d @ d))
        if dist < 1e-14:
            return []
        # lens: cos(beta) between center line and crossing
        cosb = (dist**2 + R**2 - prim.radius**2) / (2 * dist * R)
        if abs(cosb) > 1.0:
            return []
        beta = math.acos(max(-1.0, min(1.0, cosb)))
        base = math.atan2(d[1], d[0])
        return [base - beta, base + beta]
    if isinstance(prim, HalfSpace):
        nu = np.asarray(prim.normal)
        t = (prim.offset - float(nu @ c)) / R
        if abs(t) > 1.0:
            return []
        beta = math.acos(max(-1.0, min(1.0, t)))
        base = math.atan2(nu[1], nu[0])
        return [base - beta, base + beta]
    return []


def _line_cross_params(p0, d, prim):
    """Parameters t at which the line p0 + t d meets the primitive's boundary."""
    p0 = np.asarray(p0, dtype=float)
    d = np.asarray(d, dtype=float)
    if isinstance(prim, Ball):
        rel = p0 - np.asarray(prim.center)
        b = float(d @ rel)
        q = float(rel @ rel) - prim.radius**2
        disc = b * b - q
        if disc <= 0:
            return []
        r = math.sqrt(disc)
        return [-b - r, -b + r]
    if isinstance(prim, HalfSpace):
        nu = np.asarray(prim.normal)
        den = float(d @ nu)
        if abs(den) < 1e-14:
            return []
        return [(prim.offset - float(p0 @ nu)) / den]
    return []


def region_boundary_curves(region, span=1e4):
    """Oriented boundary decomposition of a composite region into arcs/segments.

    Each primitive curve is split at its crossings with every other primitive;
    pieces are kept when the region indicator flips across them, with the
    outward normal oriented by probing the exact indicator.  Unbounded line
    pieces are truncated at ``span`` (callers bound regions with a ball
    factor when exactness matters).
    """
    prims = []
    for p in shape_primitives(region):
        if not any(_same_primitive_geom(p, q) for q in prims):
            prims.append(p)
    curves = []
    for prim in prims:
        others = [q for q in prims if q is not prim]
        if isinstance(prim, Ball):
            angs = []
            for q in others:
                angs += _circle_cross_angles(prim.center, prim.radius, q)
            angs = sorted(set(a % (2 * math.pi) for a in angs))
            if not angs:
                ivs = [(0.0, 2 * math.pi)]
            else:
                ivs = list(zip(angs, angs[1:] + [angs[0] + 2 * math.pi]))
            for a0, a1 in ivs:
                if a1 - a0 < 1e-12:
                    continue
                mid = 0.5 * (a0 + a1)
                p = np.asarray(prim.center) + prim.radius * np.array(
                    [math.cos(mid), math.sin(mid)]
                )
                n = np.array([math.cos(mid), math.sin(mid)])
                keep, sign = _boundary_probe(region, p, n)
                if keep:
                    curves.append(ArcCurve(tuple(prim.center), prim.radius, a0, a1, sign))
        else:
            nu = np.asarray(prim.normal)
            dvec = np.array([-nu[1], nu[0]])
            p0 = prim.offset * nu
            ts = []
            for q in others:
                ts += _line_cross_params(p0, dvec, q)
            ts = sorted(set(ts))
            edges = [-span] + [t for t in ts if -span < t < span] + [span]
            for t0, t1 in zip(edges[:-1], edges[1:]):
                if t1 - t0 < 1e-12:
                    continue
                mid = 0.5 * (t0 + t1)
                p = p0 + mid * dvec
                keep, sign = _boundary_probe(region, p, nu)
                if keep:
                    curves.append(
                        SegmentCurve(tuple(p0 + t0 * dvec), tuple(p0 + t1 * dvec), tuple(sign * nu))
                    )
    return curves


def _same_primitive_geom(p, q):
    if isinstance(p, Ball) and isinstance(q, Ball):
        return np.allclose(p.center, q.center, atol=1e-12) and abs(p.radius - q.radius) < 1e-12
    if isinstance(p, HalfSpace) and isinstance(q, HalfSpace):
        n1, n2 = np.asarray(p.normal), np.asarray(q.normal)
        same = np.allclose(n1, n2, atol=1e-12) and abs(p.offset - q.offset) < 1e-12
        opp = np.allclose(n1, -n2, atol=1e-12) and abs(p.offset + q.offset) < 1e-12
        return same or opp
    return False


def _boundary_probe(region, p, n, eps=None):
    if eps is None:
        eps = 1e-7 * (1.0 + float(np.max(np.abs(p))))
    s_plus = int(region.sign(p + eps * n))
    s_minus = int(region.sign(p - eps * n))
    if s_plus == -1 and s_minus == 1:
        return True, 1.0
    if s_plus == 1 and s_minus == -1:
        return True, -1.0
    return False, 0.0


# ---------------------------------------------------------------------------
# angles, volumes


class DegenerateContactError(GeometryError):
    pass


def transversality_angle(E, omega: Domain, x, tol=1e-9):
    """Angle between tangent hyperplanes of dE and dOmega at a common point.

    Returns ``(psi, margin)`` with ``psi = arccos|nu_E . nu_Omega|`` and
    ``margin = 1 - |nu_E . nu_Omega|``.
    """
    x = np.asarray(x, dtype=float)
    if _dist_to_primitives(E, x) > tol or not _is_two_sided(E, x):
        raise GeometryError("point is not on the boundary of E")
    if abs(omega.exterior_distance(x)) > tol and omega.sign(x) != 0:
        proj = omega.boundary_projection(x)
        if math.sqrt(float(np.sum((proj - x) ** 2))) > tol:
            raise GeometryError("point is not on the boundary of the domain")
    nu_e = boundary_normal(E, x)
    nu_o = omega.boundary_normal(x)
    dot = abs(float(nu_e @ nu_o))
    margin = 1.0 - dot
    if margin < 1e-6:
        raise DegenerateContactError("tangential contact between dE and dOmega")
    return math.acos(min(1.0, dot)), margin


def _disk_halfplane_area(R, t):
    """Area of {x in Disk(0,R): x1 < t}."""
    if t <= -R:
        return 0.0
    if t >= R:
        return math.pi * R * R
    return t * math.sqrt(R * R - t * t) + R * R * (math.asin(t / R) + math.pi / 2)


def _ball3_halfspace_volume(R, t):
    if t <= -R:
        return 0.0
    if t >= R:
        return 4.0 / 3.0 * math.pi * R**3
    return math.pi * (R * R * t - t**3 / 3.0 + 2.0 / 3.0 * R**3)


def _lens_area(R1, R2, d):
    """Area of the intersection of two disks (2-d)."""
    if d >= R1 + R2:
        return 0.0
    if d <= abs(R1 - R2):
        r = min(R1, R2)
        return math.pi * r * r
    a1 = math.acos((d * d + R1 * R1 - R2 * R2) / (2 * d * R1))
    a2 = math.acos((d * d + R2 * R2 - R1 * R1) / (2 * d * R2))
    return R1 * R1 * (a1 - math.sin(2 * a1) / 2) + R2 * R2 * (a2 - math.sin(2 * a2) / 2)


def _lens_volume3(R1, R2, d):
    if d >= R1 + R2:
        return 0.0
    if d <= abs(R1 - R2):
        r = min(R1, R2)
        return 4.0 / 3.0 * math.pi * r**3
    return (
        math.pi
        * (R1 + R2 - d) ** 2
        * (d * d + 2 * d * (R1 + R2) - 3 * (R1 - R2) ** 2)
        / (12 * d)
    )


def lawson_volume_fraction(n: int, m: int, alpha: float) -> float:
    """H^{n+m}(C^{n,m}(alpha) ∩ B_1) / H^{n+m}(B_1), closed form for n+m <= 3."""
    if n + m > 3:
        raise UnsupportedRegionError("closed-form cone volume needs n+m <= 3")
    if (n, m) == (1, 1):
        return 2.0 * math.atan(alpha) / math.pi
    if (n, m) == (2, 1):
        return 1.0 - 1.0 / math.sqrt(1.0 + alpha * alpha)
    if (n, m) == (1, 2):
        return alpha / math.sqrt(1.0 + alpha * alpha)
    raise UnsupportedRegionError(f"unsupported cone signature ({n},{m})")


def volume_in(E, omega: Domain):
    """H^n(E ∩ Omega), closed form where available.

    Falls back to a deterministic star quadrature from the domain center for
    composite shapes.
    """
    if not omega.bounded:
        raise UnsupportedRegionError("volume in an unbounded domain is unsupported")
    ball = omega.shape
    R = ball.radius
    c = np.asarray(ball.center, dtype=float)
    if isinstance(E, Complement):
        return omega.volume() - volume_in(E.base, omega)
    if isinstance(E, HalfSpace):
        nu = np.asarray(E.normal)
        t = E.offset - float(nu @ c)
        if E.dim == 2:
            return _disk_halfplane_area(R, t)
        if E.dim == 3:
            return _ball3_halfspace_volume(R, t)
    if isinstance(E, Ball):
        d = math.sqrt(float(np.sum((np.asarray(E.center) - c) ** 2)))
        if E.dim == 2:
            return _lens_area(E.radius, R, d)
        if E.dim == 3:
            return _lens_volume3(E.radius, R, d)
    if isinstance(E, Annulus):
        d = math.sqrt(float(np.sum((np.asarray(E.center) - c) ** 2)))
        if E.dim == 2:
            return _lens_area(E.r_outer, R, d) - _lens_area(E.r_inner, R, d)
        if E.dim == 3:
            return _lens_volume3(E.r_outer, R, d) - _lens_volume3(E.r_inner, R, d)
    if isinstance(E, ConeSector2D) and np.allclose(c, 0.0):
        return math.pi * R * R / 2.0
    if isinstance(E, PieGlued) and np.allclose(c, 0.0):
        inner_vol = volume_in(E.inner, Domain(Ball(tuple(c), min(E.radius, R)), omega.tubular))
        if R <= E.radius:
            return inner_vol
        shell = Domain(Ball(tuple(c), R), omega.tubular).volume() - Domain(
            Ball(tuple(c), E.radius), omega.tubular
        ).volume()
        inner_shell = volume_in(E.inner, omega) - volume_in(
            E.inner, Domain(Ball(tuple(c), E.radius), omega.tubular)
        )
        return inner_vol + (shell - inner_shell)
    if isinstance(E, LawsonCone) and np.allclose(c, 0.0):
        return lawson_volume_fraction(E.n, E.m, E.alpha) * omega.volume()
    return _volume_star(E, omega)


def _volume_star(E, omega: Domain, n_ang=8192):
    """Deterministic area quadrature by exact ray segments from the center."""
    if omega.dim != 2:
        raise UnsupportedRegionError("quadrature volume fallback is 2-d")
    c = np.asarray(omega.shape.center, dtype=float)
    R = omega.shape.radius
    ang = 2 * math.pi * (np.arange(n_ang) + 0.5) / n_ang
    dirs = np.stack([np.cos(ang), np.sin(ang)], axis=1)
    ts = E.crossing_ts(c, dirs)
    ts = np.where(ts < R, ts, np.inf)
    ts = np.sort(ts, axis=1)
    k = ts.shape[1]
    edges = np.concatenate([np.zeros((n_ang, 1)), ts, np.full((n_ang, 1), R)], axis=1)
    edges = np.minimum(edges, R)
    total = 0.0
    for j in range(k + 1):
        a, b = edges[:, j], edges[:, j + 1]
        ok = b > a
        if not np.any(ok):
            continue
        mid = 0.5 * (a + b)
        pts = c[None, :] + mid[:, None] * dirs
        inside = E.sign(pts) > 0
        seg = np.where(ok & inside, 0.5 * (b * b - a * a), 0.0)
        total += float(np.sum(seg))
    return total * (2 * math.pi / n_ang)


# ---------------------------------------------------------------------------
# rigid motions (rotations about the origin, translations where shapes allow)


def rotated(E, angle: float):
    """Rotate a 2-d shape about the origin."""
    ca, sa = math.cos(angle), math.sin(angle)

    def rot(v):
        return (ca * v[0] - sa * v[1], sa * v[0] + ca * v[1])

    if isinstance(E, Ball):
        return Ball(rot(E.center), E.radius)
    if isinstance(E, Annulus):
        return Annulus(rot(E.center), E.r_inner, E.r_outer)
    if isinstance(E, HalfSpace):
        return HalfSpace(rot(E.normal), E.offset)
    if isinstance(E, ConeSector2D):
        return ConeSector2D(E.k, E.phase + angle)
    if isinstance(E, Complement):
        return Complement(rotated(E.base, angle))
    if isinstance(E, PieGlued):
        return PieGlued(rotated(E.inner, angle), E.radius)
    if isinstance(E, Union):
        return Union(tuple(rotated(p, angle) for p in E.parts))
    if isinstance(E, Intersection):
        return Intersection(tuple(rotated(p, angle) for p in E.parts))
    raise GeometryError(f"rotation unsupported for {type(E).__name__}")


def translated(E, shift):
    shift = np.asarray(shift, dtype=float)
    if isinstance(E, Ball):
        return Ball(tuple(np.asarray(E.center) + shift), E.radius)
    if isinstance(E, Annulus):
        return Annulus(tuple(np.asarray(E.center) + shift), E.r_inner, E.r_outer)
    if isinstance(E, HalfSpace):
        return HalfSpace(E.normal, E.offset + float(np.asarray(E.normal) @ shift))
    if isinstance(E, Complement):
        return Complement(translated(E.base, shift))
    if isinstance(E, Union):
        return Union(tuple(translated(p, shift) for p in E.parts))
    if isinstance(E, Intersection):
        return Intersection(tuple(translated(p, shift) for p in E.parts))
    raise GeometryError(f"translation unsupported for {type(E).__name__}")
