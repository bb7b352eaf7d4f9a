import math

import numpy as np
import pytest

from fracmin.curvature import (
    ClassificationError,
    CornerError,
    angle_density,
    annulus_curvature,
    annulus_defect,
    ball_curvature_raw,
    ball_mass_from,
    corner_blowup_scan,
    domain_kernel_mass,
    fb_defect,
    kernel_mass_scan,
    mean_curvature,
    shell_curvature_raw,
    tilted_defect_scan,
)
from fracmin.geometry import (
    Annulus,
    Ball,
    Complement,
    ConeSector2D,
    Domain,
    HalfSpace,
    PieGlued,
    PlanarCornerPair,
    rotated,
)
from fracmin.kernel import KernelSpec, frac_constant
from fracmin.quadrature import QuadConfig


def test_halfspace_curvature_zero(cfg):
    k = KernelSpec(2, 0.5)
    rep = mean_curvature(HalfSpace((0.0, 1.0), 0.0), np.array([0.3, 0.0]), k, cfg)
    assert abs(rep.value) <= 1e-8
    assert rep.classification == "interior-curvature"


def test_ball_curvature_anchor(cfg, anchors):
    for s in (0.3, 0.5, 0.7):
        k = KernelSpec(2, s)
        rep = mean_curvature(Ball((0.0, 0.0), 1.0), np.array([1.0, 0.0]), k, cfg)
        a = anchors["ball_curvature"][str(s)]
        sigma = math.hypot(a["sigma"], rep.result.error_estimate)
        assert abs(rep.value - a["value"]) <= 3 * sigma


def test_ball_curvature_3d_axisymmetric(cfg):
    k = KernelSpec(3, 0.5)
    rep = mean_curvature(Ball((0.0, 0.0, 0.0), 1.0), np.array([1.0, 0.0, 0.0]), k, cfg)
    assert rep.value == pytest.approx(k.c * ball_curvature_raw(0.5, 3), rel=1e-7)


def test_sector_curvature_zero_by_symmetry(cfg):
    for kk in (1, 2, 4):
        k = KernelSpec(2, 0.3)
        rep = mean_curvature(ConeSector2D(kk), np.array([0.5, 0.0]), k, cfg)
        assert abs(rep.value) <= 5 * cfg.rel_tol * 0.5 ** (-0.3) * 10


def test_corner_rejection(cfg_fast):
    k = KernelSpec(2, 0.5)
    with pytest.raises(CornerError):
        mean_curvature(ConeSector2D(2), np.zeros(2), k, cfg_fast)
    with pytest.raises(ValueError):
        mean_curvature(Ball((0.0, 0.0), 1.0), np.array([0.5, 0.0]), k, cfg_fast)


def test_complement_antisymmetry(cfg):
    k = KernelSpec(2, 0.5)
    E = Ball((0.0, 0.0), 1.0)
    x = np.array([1.0, 0.0])
    a = mean_curvature(E, x, k, cfg).value
    b = mean_curvature(Complement(E), x, k, cfg).value
    assert abs(a + b) <= 1e-10 * abs(a)


def test_rigid_motion_invariance(cfg):
    k = KernelSpec(2, 0.4)
    E = Annulus((0.0, 0.0), 1.0, 2.0)
    x = np.array([1.0, 0.0])
    base = mean_curvature(E, x, k, cfg).value
    ang = 0.83
    R = np.array([[math.cos(ang), -math.sin(ang)], [math.sin(ang), math.cos(ang)]])
    rotated_val = mean_curvature(rotated(E, ang), R @ x, k, cfg).value
    assert rotated_val == pytest.approx(base, rel=1e-7)


def test_fb_defect_halfplane_symmetry(cfg):
    k = KernelSpec(2, 0.5)
    om = Domain(Ball((0.0, 0.0), 1.0))
    rep = fb_defect(HalfSpace((0.0, 1.0), 0.0), om, np.array([2.0, 0.0]), k, cfg)
    assert abs(rep.value) <= 1e-8
    assert rep.classification == "exterior-defect"


def test_fb_defect_pieglued_rays(cfg):
    k = KernelSpec(2, 0.5)
    om = Domain(Ball((0.0, 0.0), 1.0))
    E = PieGlued(ConeSector2D(2), 1.0)
    x = np.array([1.5, 0.0])  # on a ray boundary outside the ball
    rep = fb_defect(E, om, x, k, cfg)
    assert abs(rep.value) <= 5 * cfg.rel_tol * 10


def test_fb_defect_antisymmetry_and_classification(cfg):
    k = KernelSpec(2, 0.5)
    om = Domain(Ball((0.0, 0.0), 1.0))
    E = HalfSpace((math.sin(0.2), math.cos(0.2)), 0.3)
    nu = np.array([math.sin(0.2), math.cos(0.2)])
    tau = np.array([-nu[1], nu[0]])
    x = 0.3 * nu + 1.7 * tau
    a = fb_defect(E, om, x, k, cfg).value
    b = fb_defect(Complement(E), om, x, k, cfg).value
    assert a + b == 0.0
    with pytest.raises(ClassificationError):
        fb_defect(E, om, 0.3 * nu, k, cfg)


def test_annulus_curvature_monotone_and_root_bracket(cfg):
    vals = [annulus_curvature(0.4, R, cfg) for R in (3.0, 4.0, 4.6, 5.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert vals[0] > 0 > vals[-1]


def test_annulus_curvature_engine_matches_radial(cfg):
    # the generic paired-ray engine against the radial reduction
    from fracmin.quadrature import pv_signed_kernel

    k = KernelSpec(2, 0.4)
    eng = pv_signed_kernel(Annulus((0.0, 0.0), 1.0, 3.0), np.array([1.0, 0.0]), k, cfg)
    assert eng.value == pytest.approx(k.c * shell_curvature_raw(0.4, 3.0), rel=1e-6)


def test_annulus_far_limit_matches_ball(cfg):
    # f_s(R) -> -H_ball as R grows; at R = 50 within 5% for s = 0.9
    s = 0.9
    k = KernelSpec(2, s)
    ball = k.c * ball_curvature_raw(s, 2)
    f50 = annulus_curvature(s, 50.0, cfg)
    assert f50 < 0
    assert abs(f50 + ball) <= 0.05 * ball


def test_annulus_continuity_bound(cfg):
    # |f(R1)-f(R2)| <= 2 c omega_n (R2^n - R1^n)/(R1-1)^(n+s)
    s, n = 0.4, 2
    k = KernelSpec(n, s)
    omega_n = 2 * math.pi
    for R1, R2 in ((3.0, 3.5), (4.0, 4.1), (5.0, 6.0)):
        f1 = annulus_curvature(s, R1, cfg)
        f2 = annulus_curvature(s, R2, cfg)
        bound = 2 * k.c * omega_n * (R2**n - R1**n) / (R1 - 1) ** (n + s)
        assert abs(f1 - f2) <= bound


def test_annulus_defect_signs(cfg):
    s, Rstar = 0.1, 979.5
    assert annulus_defect(s, 0.999, Rstar, cfg) > 0
    assert annulus_defect(s, 1.0 / Rstar + 1e-3, Rstar, cfg) < 0
    with pytest.raises(ClassificationError):
        annulus_defect(s, 0.5, 1.5, cfg)


def test_ball_mass_stability_far():
    # cancellation-free at extreme distances: scales exactly like D^(-2-s)
    s = 0.1
    near = ball_mass_from(10.0, 0.7, s)
    far = ball_mass_from(1e6, 0.7, s)
    assert far == pytest.approx(near * (1e6 / 10.0) ** (-2 - s), rel=1e-6)


def test_angle_density_values(cfg):
    assert angle_density(math.pi / 2, 2, cfg) == 0.0
    assert angle_density(math.pi / 3, 2, cfg) == pytest.approx(1.0, rel=1e-7)
    # psi -> 0 limit: the half-space integral, exactly 2 in the plane
    assert angle_density(0.01, 2, cfg) == pytest.approx(2.0, rel=0.02)
    grid = [angle_density(p, 2, cfg) for p in (math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)]
    assert all(a > b for a, b in zip(grid, grid[1:]))
    with pytest.raises(ValueError):
        angle_density(2.0, 2, cfg)
    with pytest.raises(ValueError):
        angle_density(0.5, 4, cfg)


def test_angle_density_closed_form_2d(cfg):
    # measured closed form in the plane: g(psi) = 2 cos(psi)
    for psi in (0.3, 0.9, 1.4):
        assert angle_density(psi, 2, cfg) == pytest.approx(2 * math.cos(psi), rel=1e-6)


def test_angle_density_3d(cfg):
    v = angle_density(math.pi / 3, 3, cfg)
    assert 0 < v < angle_density(math.pi / 4, 3, cfg)


def test_kernel_mass_scan_slopes(cfg):
    om = Domain(Ball((0.0, 0.0), 1.0))
    path = [np.array([1.0 + 2.0 ** (-kk), 0.0]) for kk in range(10, 21)]
    fit = kernel_mass_scan(om, path, KernelSpec(2, 0.5), cfg)
    assert -0.55 <= fit.exponent <= -0.45
    fit2 = kernel_mass_scan(om, path, KernelSpec(2, 0.25), cfg)
    assert -0.30 <= fit2.exponent <= -0.20


def test_kernel_mass_bound_at_fixed_distance(cfg):
    om = Domain(Ball((0.0, 0.0), 1.0))
    k = KernelSpec(2, 0.5)
    mass = domain_kernel_mass(om, np.array([1.5, 0.0]), k, cfg).value
    # Lemma-style bound: C_K * (1 + halfspace mass) * d^-s
    halfspace = math.sqrt(math.pi) * math.gamma(0.75) / math.gamma(1.25) / 0.5
    bound = k.C_K * (1.0 + halfspace) * 0.5 ** (-0.5)
    assert 0 < mass <= bound


def test_corner_blowup_scan(cfg):
    d1 = np.array([math.cos(0.3), math.sin(0.3)])
    path = [0.5 * 2.0 ** (-j) * d1 for j in range(10)]
    fit = corner_blowup_scan(PlanarCornerPair(0.3, -0.3), path, 0.5, cfg)
    assert not fit.bounded
    assert fit.sign == -1
    assert abs(fit.exponent - (-0.5)) <= 0.15 * 0.5
    fit_eq = corner_blowup_scan(PlanarCornerPair(0.3, 0.3), path, 0.5, cfg)
    assert fit_eq.bounded
    # equal sectors stay bounded (zero) along a ray boundary
    epath = [np.array([0.5 * 2.0 ** (-j), 0.0]) for j in range(8)]
    fit_sector = corner_blowup_scan(ConeSector2D(4), epath, 0.5, cfg)
    assert fit_sector.bounded


def test_tilted_defect_scan(cfg):
    f1 = tilted_defect_scan(0.4, 0.5, cfg)
    assert not f1.bounded and f1.sign == -1
    assert abs(f1.exponent - (-0.5)) <= 0.1
    f2 = tilted_defect_scan(-0.4, 0.5, cfg)
    assert not f2.bounded and f2.sign == +1
    assert abs(f2.exponent - (-0.5)) <= 0.1
    f0 = tilted_defect_scan(0.0, 0.5, cfg)
    assert f0.bounded


def test_curvature_csv_row(cfg):
    k = KernelSpec(2, 0.5)
    rep = mean_curvature(Ball((0.0, 0.0), 1.0), np.array([1.0, 0.0]), k, cfg)
    row = rep.to_csv_row()
    assert row.endswith("interior-curvature")
