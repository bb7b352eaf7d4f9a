import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fracmin.kernel import (
    KernelDomainError,
    KernelSingularityError,
    KernelSpec,
    cutoff_eta,
    frac_constant,
    kernel_eval,
    radial_segment_mass,
    regularized_kernel,
    sphere_area,
)


def test_limit_identities():
    # c/s -> 8/omega_n and c/(1-s) -> 16 n/omega_n, within 1% at 1e-3 and 1e-4
    for n in (2, 3):
        lo = 8.0 / sphere_area(n)
        hi = 16.0 * n / sphere_area(n)
        for eps in (1e-3, 1e-4):
            assert abs(frac_constant(n, eps) / eps - lo) <= 0.01 * lo
            assert abs(frac_constant(n, 1 - eps) / eps - hi) <= 0.01 * hi


def test_limit_values_n2():
    assert frac_constant(2, 1e-6) / 1e-6 == pytest.approx(4.0 / math.pi, rel=1e-4)
    assert frac_constant(2, 1 - 1e-6) / 1e-6 == pytest.approx(16.0 / math.pi, rel=1e-4)


def test_constant_against_high_precision(anchors):
    for key, val in anchors["frac_constant"].items():
        n, s = key.split("_")
        assert frac_constant(int(n), float(s)) == pytest.approx(val, rel=1e-12)


def test_domain_errors():
    with pytest.raises(KernelDomainError):
        frac_constant(2, 0.0)
    with pytest.raises(KernelDomainError):
        frac_constant(2, 1.0)
    with pytest.raises(KernelDomainError):
        frac_constant(0, 0.5)
    with pytest.raises(KernelDomainError):
        KernelSpec(2, 1.5)


def test_standard_eval_and_homogeneity():
    k = KernelSpec(2, 0.5)
    z = np.array([1.0, 0.0])
    assert kernel_eval(k, z) == pytest.approx(k.c)
    assert kernel_eval(k, 2 * z) / kernel_eval(k, z) == pytest.approx(2.0 ** (-2.5))
    with pytest.raises(KernelSingularityError):
        kernel_eval(k, np.zeros(2))


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=2, max_size=2).filter(lambda v: max(abs(x) for x in v) > 1e-6))
def test_symmetry(z):
    k = KernelSpec(2, 0.4)
    z = np.asarray(z)
    assert kernel_eval(k, z) == kernel_eval(k, -z)


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(-4, 4), st.floats(-4, 4))
def test_admissibility(s, z1, z2):
    z = np.array([z1, z2])
    if max(abs(z1), abs(z2)) < 1e-6:
        return
    k = KernelSpec(2, s)
    r = float(np.hypot(*z))
    assert kernel_eval(k, z) * r ** (2 + s) <= k.C_K * (1 + 1e-12)


def test_custom_kernel_admissible():
    k = KernelSpec(2, 0.5, kind="custom", profile_r=(0.1, 1.0, 10.0), profile_m=(0.5, 1.0, 0.25))
    assert k.C_K == pytest.approx(k.c)
    z = np.array([1.0, 0.0])
    assert kernel_eval(k, z) == pytest.approx(k.c)
    assert kernel_eval(k, 10 * z) == pytest.approx(0.25 * k.c * 10 ** (-2.5))


def test_cutoff_bands():
    delta = 0.05
    r = np.array([delta / 2, delta, 3 * delta, 1.0, 1 / (2 * delta), 1 / delta + 1])
    eta = cutoff_eta(r, delta)
    assert eta[0] == 1.0 and eta[1] == 1.0
    assert eta[2] == 0.0 and eta[3] == 0.0 and eta[4] == 0.0
    assert eta[5] == 1.0
    # slope bound |eta'| <= 2/delta
    rr = np.linspace(1e-4, 2 / delta, 40001)
    d = np.diff(cutoff_eta(rr, delta)) / np.diff(rr)
    assert np.max(np.abs(d)) <= 2.0 / delta + 1e-6


def test_regularized_kernel_values():
    k = KernelSpec(2, 0.5)
    delta = 0.05
    kr = regularized_kernel(k, delta)
    assert kernel_eval(kr, np.array([delta / 2, 0.0])) == 0.0
    z = np.array([3 * delta, 0.0])
    assert kernel_eval(kr, z) == pytest.approx(kernel_eval(k, z))
    assert kernel_eval(kr, np.array([1 / delta + 5, 0.0])) == 0.0
    # boundedness: sup over dense samples <= K at |z| = delta
    rr = np.linspace(1e-6, 2.0, 20001)
    vals = kr.radial(rr)
    assert np.max(vals) <= k.radial(np.array([delta]))[0] * (1 + 1e-12)
    with pytest.raises(KernelDomainError):
        regularized_kernel(k, 0.6)


def test_regularized_monotone_in_delta():
    # K_delta increases pointwise as delta halves, and approaches K
    k = KernelSpec(2, 0.3)
    rr = np.linspace(1e-4, 3.0, 5001)
    prev = None
    for j in range(3, 8):
        kv = regularized_kernel(k, 2.0 ** (-j)).radial(rr)
        if prev is not None:
            assert np.all(kv >= prev - 1e-15)
        prev = kv
    # L1 gap on B_1 \ B_eps shrinks to zero
    eps = 1e-2
    rr = np.linspace(eps, 1.0, 20001)
    full = k.radial(rr)
    gaps = []
    for j in range(3, 9):
        kv = regularized_kernel(k, 2.0 ** (-j)).radial(rr)
        gaps.append(np.trapezoid(np.abs(full - kv) * 2 * np.pi * rr, rr))
    assert gaps[-1] < 1e-12
    assert all(b <= a + 1e-15 for a, b in zip(gaps, gaps[1:]))


def test_segment_mass_exact_and_regularized():
    k = KernelSpec(2, 0.5)
    a, b = np.array([0.5]), np.array([2.0])
    exact = k.c * (0.5 ** (-0.5) - 2.0 ** (-0.5)) / 0.5
    assert radial_segment_mass(k, a, b)[0] == pytest.approx(exact, rel=1e-14)
    # tail
    assert radial_segment_mass(k, a, np.array([np.inf]))[0] == pytest.approx(
        k.c * 0.5 ** (-0.5) / 0.5, rel=1e-14
    )
    # regularized kernel: numeric path matches dense trapezoid
    kr = regularized_kernel(k, 0.05)
    rr = np.linspace(0.02, 3.0, 400001)
    ref = np.trapezoid(kr.radial(rr) * rr, rr)
    got = radial_segment_mass(kr, np.array([0.02]), np.array([3.0]))[0]
    assert got == pytest.approx(ref, rel=1e-6)


def test_json_round_trip():
    k = KernelSpec(3, 0.25, delta=0.01)
    k2 = KernelSpec.from_json(k.to_json())
    assert k2 == k
