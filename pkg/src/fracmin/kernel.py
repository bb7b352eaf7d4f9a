"""Fractional-order interaction kernels and their normalization.

The standard kernel is ``c(n,s) |z|^(-n-s)`` with the normalization chosen so
that ``c/s -> 8/omega_n`` as ``s -> 0`` and ``c/(1-s) -> 16 n/omega_n`` as
``s -> 1``, where ``omega_n`` is the surface measure of the unit sphere in
``R^n``.  Custom kernels are radial-profile modulations of the standard one,
kept inside the admissibility envelope ``K(z) <= C_K |z|^(-n-s)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
import json
import math

import numpy as np
from scipy.special import gamma


class KernelDomainError(ValueError):
    """Raised for parameters outside the supported fractional range."""


class KernelSingularityError(ZeroDivisionError):
    """Raised when an unregularized kernel is evaluated at the origin."""


def sphere_area(n: int) -> float:
    """Surface measure of the (n-1)-sphere bounding the unit ball of R^n."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


def frac_constant(n: int, s: float) -> float:
    """Normalization constant of the fractional perimeter kernel.

    c(n,s) = s(1-s) 2^(2+2s) Gamma(n/2+s) / (pi^(n/2) Gamma(2-s)).

    Satisfies c/s -> 8/omega_n (s->0) and c/(1-s) -> 16n/omega_n (s->1).
    """
    if not (isinstance(n, (int, np.integer)) and n >= 1):
        raise KernelDomainError(f"dimension must be an integer >= 1, got {n!r}")
    if not (0.0 < s < 1.0):
        raise KernelDomainError(f"fractional order must lie in (0,1), got {s!r}")
    return (
        s * (1.0 - s) * 2.0 ** (2.0 + 2.0 * s) * gamma(n / 2.0 + s)
        / (math.pi ** (n / 2.0) * gamma(2.0 - s))
    )


def _smoothstep(t):
    """Cubic smoothstep, clamped to [0,1]; max slope 3/2."""
    t = np.clip(t, 0.0, 1.0)
    return t * t * (3.0 - 2.0 * t)


def cutoff_eta(r, delta: float):
    """Cutoff family: 1 on [0,d] and [1/d,inf), 0 on [2d, 1/(2d)], |eta'| <= 2/d.

    Transitions are cubic smoothsteps in linear radius, so the slope bound
    3/(2 delta) <= 2/delta holds on the inner band (the outer band is milder).
    """
    r = np.asarray(r, dtype=float)
    inner = 1.0 - _smoothstep((r - delta) / delta)
    outer = _smoothstep((r - 1.0 / (2.0 * delta)) / (1.0 / (2.0 * delta)))
    return np.clip(inner + outer, 0.0, 1.0)


@dataclass(frozen=True)
class KernelSpec:
    """Immutable description of an admissible fractional kernel.

    ``kind`` is "fractional" (the standard kernel) or "custom" (a tabulated
    radial multiplier ``m(r)`` applied to the standard envelope; ``m`` is
    interpolated log-linearly inside the table and held constant outside it).
    ``delta`` switches on the two-sided cutoff regularization.
    """

    n: int
    s: float
    kind: str = "fractional"
    delta: float | None = None
    profile_r: tuple = field(default=())
    profile_m: tuple = field(default=())

    def __post_init__(self):
        if not (isinstance(self.n, (int, np.integer)) and self.n >= 1):
            raise KernelDomainError(f"dimension must be an integer >= 1, got {self.n!r}")
        if not (0.0 < self.s < 1.0):
            raise KernelDomainError(f"fractional order must lie in (0,1), got {self.s!r}")
        if self.kind not in ("fractional", "custom"):
            raise KernelDomainError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "custom":
            if len(self.profile_r) < 2 or len(self.profile_r) != len(self.profile_m):
                raise KernelDomainError("custom kernels need matching radius/value tables")
            if min(self.profile_m) < 0:
                raise KernelDomainError("kernel profile must be nonnegative")
        if self.delta is not None and not (0.0 < self.delta < 0.5):
            raise KernelDomainError("regularization radius must lie in (0, 1/2)")

    @property
    def c(self) -> float:
        return frac_constant(self.n, self.s)

    @property
    def C_K(self) -> float:
        """Admissibility bound constant: K(z) <= C_K |z|^(-n-s)."""
        if self.kind == "fractional":
            return self.c
        return self.c * max(self.profile_m)

    def multiplier(self, r):
        """Radial multiplier m(r) relative to the standard envelope."""
        r = np.asarray(r, dtype=float)
        if self.kind == "fractional":
            return np.ones_like(r)
        rt = np.asarray(self.profile_r, dtype=float)
        mt = np.asarray(self.profile_m, dtype=float)
        lo, hi = rt[0], rt[-1]
        rc = np.clip(r, lo, hi)
        m = np.interp(np.log(rc), np.log(rt), mt)
        return m

    def radial(self, r):
        """Radial kernel value K(|z|=r), including any regularization."""
        r = np.asarray(r, dtype=float)
        if np.any(r == 0.0) and self.delta is None:
            raise KernelSingularityError("kernel evaluated at the origin")
        with np.errstate(divide="ignore"):
            val = self.c * self.multiplier(r) * r ** (-(self.n + self.s))
        if self.delta is not None:
            val = np.where(r == 0.0, 0.0, val * (1.0 - cutoff_eta(r, self.delta)))
        return val

    def to_json(self) -> str:
        d = {"n": int(self.n), "s": self.s, "kind": self.kind}
        if self.delta is not None:
            d["delta"] = self.delta
        if self.kind == "custom":
            d["profile_r"] = list(self.profile_r)
            d["profile_m"] = list(self.profile_m)
        return json.dumps(d)

    @staticmethod
    def from_json(text: str) -> "KernelSpec":
        d = json.loads(text)
        return KernelSpec(
            n=int(d["n"]),
            s=float(d["s"]),
            kind=d.get("kind", "fractional"),
            delta=d.get("delta"),
            profile_r=tuple(d.get("profile_r", ())),
            profile_m=tuple(d.get("profile_m", ())),
        )


def kernel_eval(k: KernelSpec, z):
    """Evaluate K(z) for one point or an array of points (last axis = R^n)."""
    z = np.asarray(z, dtype=float)
    r = np.sqrt(np.sum(z * z, axis=-1))
    return k.radial(r)


def regularized_kernel(k: KernelSpec, delta: float) -> KernelSpec:
    """Two-sided cutoff regularization: vanishes for |z|<=delta and |z|>=1/delta."""
    if not (0.0 < delta < 0.5):
        raise KernelDomainError("regularization radius must lie in (0, 1/2); bands overlap otherwise")
    return replace(k, delta=delta)


# ---------------------------------------------------------------------------
# Radial segment masses: int_a^b K(t) t^(n-1) dt, the building block of every
# ray-decomposed integral in this package.  Exact for the standard kernel;
# Gauss panels in log-radius for custom/regularized profiles.

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(16)


def _power_mass(s: float, a, b):
    """int_a^b t^(-1-s) dt with b possibly infinite (elementwise)."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    ia = np.where(a > 0, a ** (-s), np.inf)
    ib = np.where(np.isfinite(b), b ** (-s), 0.0)
    return (ia - ib) / s


def radial_segment_mass(k: KernelSpec, a, b):
    """int_a^b K(t) t^(n-1) dt, elementwise over segment arrays.

    ``b`` may be ``inf`` (exact power tail; custom profiles are constant
    beyond their table so the tail is exact there too).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if k.kind == "fractional" and k.delta is None:
        return k.c * _power_mass(k.s, a, b)
    return _profile_segment_mass(k, a, b)


def _profile_segment_mass(k: KernelSpec, a, b):
    # split segments at the breakpoints of the profile/cutoff, then integrate
    # t^(-1-s) m(t) (1-eta) per smooth piece: exact power where m, eta constant,
    # log-Gauss panels elsewhere.
    brk = []
    if k.delta is not None:
        d = k.delta
        brk += [d, 2 * d, 1 / (2 * d), 1 / d]
    if k.kind == "custom":
        brk += [k.profile_r[0], k.profile_r[-1]]
    brk = np.array(sorted(set(brk)))

    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    out = np.zeros(np.broadcast(a, b).shape)
    a, b = np.broadcast_arrays(a, b)

    def piece(lo, hi):
        # int_lo^hi t^(-1-s) m(t)(1-eta(t)) dt on a piece with no breakpoints
        res = np.zeros_like(lo)
        finite = np.isfinite(hi)
        if np.any(~finite):
            # beyond all breakpoints: multiplier constant, eta known constant
            t_probe = lo[~finite] * 2.0
            fac = k.multiplier(t_probe)
            if k.delta is not None:
                fac = fac * (1.0 - cutoff_eta(t_probe, k.delta))
            res[~finite] = fac * _power_mass(k.s, lo[~finite], np.inf)
        if np.any(finite):
            lo_f, hi_f = lo[finite], hi[finite]
            # log substitution t = exp(u)
            u0, u1 = np.log(lo_f), np.log(hi_f)
            um = 0.5 * (u0 + u1)[:, None] + 0.5 * (u1 - u0)[:, None] * _GL_NODES[None, :]
            t = np.exp(um)
            f = t ** (-k.s) * k.multiplier(t)
            if k.delta is not None:
                f = f * (1.0 - cutoff_eta(t, k.delta))
            res[finite] = 0.5 * (u1 - u0) * np.sum(f * _GL_WEIGHTS[None, :], axis=1)
        return res

    cuts = [np.maximum(a, np.minimum(np.full_like(a, c), b)) for c in brk]
    edges = [a] + cuts + [b]
    for lo, hi in zip(edges[:-1], edges[1:]):
        ok = hi > lo
        if np.any(ok):
            contrib = np.zeros_like(out)
            contrib[ok] = piece(lo[ok], hi[ok])
            out += contrib
    return k.c * (out if out.shape else float(out))
