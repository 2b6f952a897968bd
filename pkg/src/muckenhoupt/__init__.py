"""Muckenhoupt-type densities on R^n and numerical checks of large-scale
homogeneity and isotropy."""
from .ap import (
    ApProduct,
    BallFamily,
    ap_product,
    default_family,
    doubling_ratio,
    estimate_ap_constant,
    subset_ratio_scan,
)
from .density import (
    Constant,
    Density,
    DistancePower,
    Exponential,
    Membership,
    ProductOfRadialPowers,
    RadialPower,
    ap_membership,
    closed_form_ball_mass,
    closed_form_mass,
)
from .errors import (
    DimensionMismatch,
    InvalidParameter,
    LambdaUndefined,
    MuckenhouptError,
    NotIntegrable,
    SingularHitError,
)
from .geometry import Ball, Hyperplane, PointSet, Shell, Sphere, distance_to_set, proof_inclusions
from .homogeneity import RatioCurve, Verdict, envelope, fit_envelope, ratio_curve
from .integrate import MassEstimate, Method, line_mass, mass, mass_pair, sample_uniform
from .isotropy import IsotropyVerdict, isotropy_ratio_curve, lemma_bounds, line_mass_result

__version__ = "0.1.0"
