import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracmin.geometry import (
    Annulus,
    Ball,
    Complement,
    ConeSector2D,
    DegenerateContactError,
    Domain,
    GeometryError,
    HalfSpace,
    Intersection,
    LawsonCone,
    PieGlued,
    PlanarCornerPair,
    Union,
    UnsupportedRegionError,
    boundary_normal,
    boundary_sample,
    indicator,
    lawson_volume_fraction,
    region_boundary_curves,
    rotated,
    translated,
    transversality_angle,
    volume_in,
)


def test_indicator_basics():
    ball = Ball((0.0, 0.0), 1.0)
    assert indicator(ball, np.zeros(2)) == 1
    assert indicator(Complement(ball), np.zeros(2)) == -1
    assert indicator(ball, np.array([2.0, 0.0])) == -1
    # exact boundary hit flagged
    assert indicator(ball, np.array([1.0, 0.0])) == 0


def test_pie_glued_flip():
    tilde = ConeSector2D(2)
    pie = PieGlued(tilde, 1.0)
    x = np.array([0.5, 0.5])  # first-quadrant sector is inside the cone set
    assert indicator(tilde, x) == 1
    assert indicator(pie, x) == 1
    assert indicator(pie, 3 * x) == -1  # flipped outside the gluing circle
    y = np.array([-0.3, 0.4])  # second quadrant: outside the cone set
    assert indicator(pie, y) == -1
    assert indicator(pie, 5 * y) == 1


def test_corner_pair_signs():
    E = PlanarCornerPair(0.3, -0.3)
    # on branch 1 the set lies below the omega_1 line
    d1 = np.array([math.cos(0.3), math.sin(0.3)])
    w1 = np.array([-math.sin(0.3), math.cos(0.3)])
    p = 0.5 * d1
    assert indicator(E, p - 1e-6 * w1) == 1
    assert indicator(E, p + 1e-6 * w1) == -1
    # a representable on-boundary point is flagged exactly
    E0 = PlanarCornerPair(0.0, -0.6)
    assert indicator(E0, np.array([0.5, 0.0])) == 0


@settings(max_examples=80, deadline=None)
@given(st.floats(-2, 2), st.floats(-2, 2))
def test_complement_involution(x, y):
    shapes = [
        Ball((0.1, -0.2), 0.8),
        HalfSpace((0.6, 0.8), 0.1),
        ConeSector2D(3),
        Annulus((0.0, 0.0), 0.5, 1.5),
    ]
    p = np.array([x, y])
    for E in shapes:
        assert indicator(E, p) + indicator(Complement(E), p) == 0


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))
def test_rigid_motion_equivariance(angle, x, y):
    from fracmin.geometry import _dist_to_primitives

    p = np.array([x, y])
    ca, sa = math.cos(angle), math.sin(angle)
    gp = np.array([ca * x - sa * y, sa * x + ca * y])
    for E in (Ball((0.3, 0.0), 0.7), HalfSpace((0.0, 1.0), 0.2), ConeSector2D(2)):
        if _dist_to_primitives(E, p) < 1e-9:  # rounding can flip measure-zero hits
            continue
        assert indicator(rotated(E, angle), gp) == indicator(E, p)


def test_translation():
    E = Ball((0.0, 0.0), 1.0)
    E2 = translated(E, np.array([0.5, -0.25]))
    assert indicator(E2, np.array([0.5, -0.25])) == 1
    H = translated(HalfSpace((0.0, 1.0), 0.0), np.array([0.0, 0.3]))
    assert H.offset == pytest.approx(0.3)


def test_boundary_sample_circle_length():
    samples = boundary_sample(Ball((0.0, 0.0), 1.0), Ball((0.0, 0.0), 2.0), 0.05)
    total = sum(s.weight for s in samples)
    assert total == pytest.approx(2 * math.pi, rel=1e-9)
    for s in samples[:10]:
        assert np.linalg.norm(s.normal) == pytest.approx(1.0, abs=1e-12)
        assert s.weight > 0


def test_boundary_sample_sphere_area_3d():
    samples = boundary_sample(Ball((0.0, 0.0, 0.0), 1.5), Ball((0.0, 0.0, 0.0), 3.0), 0.2)
    total = sum(s.weight for s in samples)
    assert total == pytest.approx(4 * math.pi * 1.5**2, rel=1e-6)


def test_boundary_sample_halfspace_diameter():
    samples = boundary_sample(HalfSpace((0.0, 1.0), 0.0), Ball((0.0, 0.0), 1.0), 0.02)
    total = sum(s.weight for s in samples)
    assert total == pytest.approx(2.0, rel=1e-9)


def test_boundary_sample_annulus_window():
    # only the inner circle of Annulus(0.5, 2) lies inside the unit-ball window
    samples = boundary_sample(Annulus((0.0, 0.0), 0.5, 2.0), Ball((0.0, 0.0), 1.0), 0.05)
    total = sum(s.weight for s in samples)
    assert total == pytest.approx(math.pi, rel=1e-9)
    assert {s.patch for s in samples} == {"inner-circle"}


def test_boundary_sample_commutes_with_rotation():
    window = Ball((0.0, 0.0), 2.0)
    base = boundary_sample(ConeSector2D(2), window, 0.1)
    rot = boundary_sample(rotated(ConeSector2D(2), 0.7), window, 0.1)
    ca, sa = math.cos(0.7), math.sin(0.7)
    R = np.array([[ca, -sa], [sa, ca]])
    got = sorted(map(tuple, np.round([R @ s.point for s in base], 9).tolist()))
    want = sorted(map(tuple, np.round([s.point for s in rot], 9).tolist()))
    assert got == want


def test_transversality_angles():
    om = Domain(Ball((0.0, 0.0), 1.0))
    psi, margin = transversality_angle(HalfSpace((0.0, 1.0), 0.0), om, np.array([1.0, 0.0]))
    assert psi == pytest.approx(math.pi / 2)
    assert margin == pytest.approx(1.0)
    # line through e1 tilted from the tangent: psi = pi/2 - tilt
    th = math.pi / 6
    E = HalfSpace((-math.sin(th), math.cos(th)), -math.sin(th))  # passes through e1
    psi, margin = transversality_angle(E, om, np.array([1.0, 0.0]))
    assert psi == pytest.approx(math.pi / 2 - th, rel=1e-12)
    # tangential contact refused
    with pytest.raises(DegenerateContactError):
        transversality_angle(HalfSpace((1.0, 0.0), 1.0), om, np.array([1.0, 0.0]))
    with pytest.raises(GeometryError):
        transversality_angle(HalfSpace((0.0, 1.0), 0.0), om, np.array([5.0, 0.0]))


def test_volumes_closed_form():
    om = Domain(Ball((0.0, 0.0), 1.0))
    assert volume_in(HalfSpace((0.0, 1.0), 0.0), om) == pytest.approx(math.pi / 2)
    for k in (1, 2, 4):
        assert volume_in(ConeSector2D(k), om) == pytest.approx(math.pi / 2)
    assert volume_in(LawsonCone(1, 1, 1.0), om) == pytest.approx(math.pi / 2)
    assert volume_in(Ball((0.0, 0.0), 0.5), om) == pytest.approx(math.pi / 4)
    assert volume_in(Annulus((0.0, 0.0), 0.5, 2.0), om) == pytest.approx(math.pi * (1 - 0.25))
    with pytest.raises(UnsupportedRegionError):
        volume_in(Ball((0.0, 0.0), 1.0), Domain(HalfSpace((0.0, 1.0), 0.0)))


def test_volume_complement_partition():
    om = Domain(Ball((0.2, -0.1), 1.3))
    for E in (Ball((0.5, 0.0), 0.6), HalfSpace((0.3, 0.9), 0.1)):
        v1 = volume_in(E, om)
        v2 = volume_in(Complement(E), om)
        assert v1 + v2 == pytest.approx(om.volume(), rel=1e-12)


def test_volume_star_fallback():
    om = Domain(Ball((0.0, 0.0), 1.0))
    E = Union((Ball((0.4, 0.0), 0.3), Ball((-0.4, 0.0), 0.3)))
    v = volume_in(E, om)
    assert v == pytest.approx(2 * math.pi * 0.09, rel=2e-4)


def test_lawson_fraction_3d():
    assert lawson_volume_fraction(2, 1, math.sqrt(3.0)) == pytest.approx(0.5, abs=1e-14)
    assert lawson_volume_fraction(1, 2, 1.0 / math.sqrt(3.0)) == pytest.approx(0.5, abs=1e-14)
    assert lawson_volume_fraction(1, 1, 1.0) == pytest.approx(0.5, abs=1e-14)
    # monotone in the opening
    vals = [lawson_volume_fraction(2, 1, a) for a in (0.1, 0.5, 1.0, 2.0, 10.0)]
    assert all(a < b for a, b in zip(vals, vals[1:]))


def test_region_boundary_extraction():
    reg = Intersection((Ball((0.0, 0.0), 1.0), HalfSpace((0.0, 1.0), 0.0)))
    curves = region_boundary_curves(reg)
    total = sum(c.length for c in curves)
    assert total == pytest.approx(math.pi + 2.0, rel=1e-9)
    # outward normals: probe a point just outside through each curve midpoint
    for c in curves:
        pts, normals, _ = c.at(np.array([0.5]))
        assert reg.sign(pts[0] + 1e-6 * normals[0]) == -1
        assert reg.sign(pts[0] - 1e-6 * normals[0]) == 1


def test_boundary_normal_orientation():
    E = Ball((0.0, 0.0), 1.0)
    n = boundary_normal(E, np.array([0.0, 1.0]))
    assert n == pytest.approx([0.0, 1.0])
    n2 = boundary_normal(Complement(E), np.array([0.0, 1.0]))
    assert n2 == pytest.approx([0.0, -1.0])
