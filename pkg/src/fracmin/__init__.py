"""Numerical laboratory for nonlocal free boundary minimal surfaces."""

from .curvature import (
    CurvatureReport,
    angle_density,
    annulus_curvature,
    annulus_defect,
    corner_blowup_scan,
    fb_defect,
    kernel_mass_scan,
    mean_curvature,
    tilted_defect_scan,
)
from .experiments import (
    AnnulusSolution,
    catenoid_volume_defect,
    lawson_halfvolume_alpha,
    s_to_1_concentration,
    solve_annulus,
    solve_Rstar,
    solve_rstar,
    stickiness_blowup_scan,
    sweep_Rstar,
    volume_condition_check,
)
from .geometry import (
    Annulus,
    Ball,
    Complement,
    ConeSector2D,
    Domain,
    HalfSpace,
    Intersection,
    LawsonCone,
    PieGlued,
    PlanarCornerPair,
    SurfaceSample,
    Union,
    boundary_sample,
    indicator,
    transversality_angle,
    volume_in,
)
from .kernel import KernelSpec, frac_constant, kernel_eval, regularized_kernel, sphere_area
from .perimeter import PerimeterBreakdown, frac_perimeter, interaction
from .quadrature import (
    IntegralResult,
    QuadConfig,
    mc_pair_integrate,
    pv_integrate,
    region_integrate,
    rng_for,
)
from .variation import (
    TangentField,
    criticality_residual,
    first_variation_fd,
    first_variation_formula,
    flow,
    make_tangent_field,
)

__version__ = "0.1.0"
