"""Brute-force Monte Carlo oracles, independent of the package's quadrature.

These deliberately avoid the ray decomposition: plain excision with
empirical-rate extrapolation for the principal value, and importance-sampled
pair interactions for the perimeter terms.  Run once by
scripts/compute_oracles.py; frozen outputs live in tests/_anchors/.
"""

import math

import numpy as np
from scipy.integrate import quad

from fracmin.kernel import frac_constant


def _batched_rng(seed, batch):
    return np.random.Generator(np.random.Philox(key=np.array([seed, batch], dtype=np.uint64)))


def ball_curvature_mc(s, n_samples=10**8, seed=2024, eps0=1e-2, batches=32, levels=5):
    """Plain-excision MC for the unit-disk curvature at e1 (n = 2).

    Samples |z| ~ t^(-1-s) on (eps0 2^(1-levels), 2); outside |z| > 2 the
    signed indicator is +1 exactly and the tail integrates in closed form.
    Nested excision levels share one stream; a known-rate Richardson stage
    (the flat-graph excision error is O(eps^(1-s))) removes the leading term
    and an Aitken stage absorbs the remainder; sigma from batch means.
    """
    c = frac_constant(2, s)
    t_lo, t_hi = eps0 * 2.0 ** (1 - levels), 2.0
    tail = c * 2.0 * math.pi * t_hi ** (-s) / s
    eps_levels = [eps0 * 2.0 ** (-j) for j in range(levels)]
    per_batch = int(math.ceil(n_samples / (2 * batches)))
    est = np.zeros((batches, levels))
    x = np.array([1.0, 0.0])

    def shell_mean(rng, lo, hi, count):
        # mean of the signed indicator against the kernel over lo < |z| < hi
        c_norm = (lo ** (-s) - hi ** (-s)) / s
        u01 = rng.random(count)
        t = (lo ** (-s) - u01 * (lo ** (-s) - hi ** (-s))) ** (-1.0 / s)
        phi = 2.0 * math.pi * rng.random(count)
        y = x[None, :] + t[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        u = np.where(np.sum(y * y, axis=1) > 1.0, 1.0, -1.0)
        sums = {}
        for j, eps in enumerate(eps_levels):
            if eps <= lo:
                sums[j] = float(np.mean(u))
            elif eps < hi:
                sums[j] = float(np.mean(np.where(t >= eps, u, 0.0)))
            else:
                sums[j] = 0.0
        return {j: c * 2.0 * math.pi * c_norm * m for j, m in sums.items()}

    for b in range(batches):
        rng = _batched_rng(seed, b)
        outer = shell_mean(rng, eps0, t_hi, per_batch)  # carries the bulk signal
        inner = shell_mean(rng, t_lo, eps0, per_batch)  # small excision corrections
        for j in range(levels):
            est[b, j] = outer[j] + inner[j] + tail

    # two-rate fit: the flat-graph excision error is C eps^(1-s) with an
    # O(eps) curvature correction; solve [H, C, D] per batch by least squares
    eps_arr = np.array(eps_levels)
    basis = np.stack([np.ones_like(eps_arr), eps_arr ** (1.0 - s), eps_arr], axis=1)
    fits = np.array([np.linalg.lstsq(basis, row, rcond=None)[0][0] for row in est])
    mean = float(np.mean(fits))
    sigma = float(np.std(fits, ddof=1) / math.sqrt(batches))
    # model remainder: drop the finest level and refit on the pooled means
    pooled = est.mean(axis=0)
    alt = np.linalg.lstsq(basis[:-1], pooled[:-1], rcond=None)[0][0]
    sys_err = abs(float(np.linalg.lstsq(basis, pooled, rcond=None)[0][0]) - alt)
    return mean, math.sqrt(sigma**2 + sys_err**2)


def _halfdisk_graded_sampler(rng, count, rho):
    """Upper-half-disk points with per-candidate density (1-rho) x2^(-rho) / 2.

    x2 from the inverse CDF of t^(-rho), thinned by the chord half-width,
    x1 uniform across the chord; unaccepted candidates simply drop out of the
    sum (the estimator divides by the candidate count)."""
    u = rng.random(count)
    x2 = u ** (1.0 / (1.0 - rho))
    w = np.sqrt(1.0 - x2 * x2)
    keep = rng.random(count) < w
    x2 = x2[keep]
    w = w[keep]
    x1 = (2.0 * rng.random(len(x2)) - 1.0) * w
    pts = np.stack([x1, x2], axis=1)
    dens = (1.0 - rho) * x2 ** (-rho) / 2.0
    return pts, dens


def halfplane_perimeter_mc(s, n_samples=10**8, seed=77, batches=32):
    """The three localized perimeter terms of {x2 < 0} in the unit disk.

    in-in: both factors adjacent along the diameter; interface-graded and
    radially-graded proposals keep the variance finite for every s in (0,1).
    in-out / out-in: bounded factor uniform, partner from a near/far radial
    mixture covering the whole plane (no truncation bias)."""
    c = frac_constant(2, s)
    rho = 0.85
    a = -0.9
    per_batch = int(math.ceil(n_samples / (3 * batches)))
    t_split = 2.0
    C_a = t_split ** (a + 1.0) / (a + 1.0)
    C_far = t_split ** (-s) / s
    vals = np.zeros((batches, 3))
    for b in range(batches):
        rng = _batched_rng(seed, b)
        # ---- in-in: u in upper half-disk (E^c side), v = u + t theta in lower
        pts, dens = _halfdisk_graded_sampler(rng, per_batch, rho)
        m = len(pts)
        t = (rng.random(m) * (a + 1.0) * C_a) ** (1.0 / (a + 1.0))
        phi = 2.0 * math.pi * rng.random(m)
        v = pts + t[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)
        in_target = (np.sum(v * v, axis=1) < 1.0) & (v[:, 1] < 0.0)
        q_v = t**a / C_a / (2.0 * math.pi * t)
        w = np.where(in_target, c * t ** (-2.0 - s) / (dens * q_v), 0.0)
        vals[b, 0] = float(np.sum(w)) / per_batch
        # ---- in-out and out-in
        for col, (lower_u, target_lower) in enumerate(((True, False), (False, True)), start=1):
            x1 = 2.0 * rng.random(per_batch) - 1.0
            x2 = rng.random(per_batch) * (-1.0 if lower_u else 1.0)
            u_pts = np.stack([x1, x2], axis=1)
            in_u = np.sum(u_pts * u_pts, axis=1) < 1.0
            t_u = rng.random(per_batch)
            near = rng.random(per_batch) < 0.5
            t = np.where(
                near,
                (t_u * (a + 1.0) * C_a) ** (1.0 / (a + 1.0)),
                t_split * (1.0 - t_u) ** (-1.0 / s),
            )
            phi = 2.0 * math.pi * rng.random(per_batch)
            v = u_pts + t[:, None] * np.stack([np.cos(phi), np.sin(phi)], axis=1)
            outside = np.sum(v * v, axis=1) > 1.0
            side = (v[:, 1] < 0.0) if target_lower else (v[:, 1] > 0.0)
            in_v = outside & side
            q_t = 0.5 * np.where(t < t_split, t**a / C_a, 0.0) + 0.5 * np.where(
                t >= t_split, t ** (-1.0 - s) / C_far, 0.0
            )
            q_v = q_t / (2.0 * math.pi * t)
            w = np.where(in_u & in_v, c * t ** (-2.0 - s) / (0.5 * q_v), 0.0)
            vals[b, col] = float(np.sum(w)) / per_batch
    means = vals.mean(axis=0)
    sig = vals.std(axis=0, ddof=1) / math.sqrt(batches)
    return {
        "in_in": (float(means[0]), float(sig[0])),
        "in_out": (float(means[1]), float(sig[1])),
        "out_in": (float(means[2]), float(sig[2])),
        "total": (float(means.sum()), float(np.sqrt(np.sum(sig**2)))),
    }


def lawson_volume_mc(n, m, alpha, n_samples=10**7, seed=5):
    """Fraction of the unit ball of R^(n+m) inside the cone |x| < alpha |y|."""
    dim = n + m
    rng = _batched_rng(seed, 0)
    total = 0
    hits = 0
    for _ in range(10):
        pts = rng.uniform(-1.0, 1.0, size=(n_samples // 10, dim))
        r2 = np.sum(pts * pts, axis=1)
        inside = r2 < 1.0
        p = pts[inside]
        xs = np.sum(p[:, :n] ** 2, axis=1)
        ys = np.sum(p[:, n:] ** 2, axis=1)
        hits += int(np.sum(xs < alpha * alpha * ys))
        total += len(p)
    frac = hits / total
    return frac, math.sqrt(frac * (1 - frac) / total)


def region_singular_mc(s, n_samples=10**7, seed=9):
    """MC value of int over B_1 ∩ {y1 < 0} of |e_1 - y|^(-2-s) dy."""
    rng = _batched_rng(seed, 1)
    pts = rng.uniform(-1.0, 1.0, size=(n_samples, 2))
    inside = (np.sum(pts * pts, axis=1) < 1.0) & (pts[:, 0] < 0.0)
    f = np.where(inside, ((pts[:, 0] - 1.0) ** 2 + pts[:, 1] ** 2) ** (-(2.0 + s) / 2.0), 0.0)
    mean = 4.0 * float(np.mean(f))
    sigma = 4.0 * float(np.std(f) / math.sqrt(n_samples))
    return mean, sigma
