"""Convexification exponents, positivity shifts and proximal minimisation for polynomials."""
from .poly import LineParam, Polynomial, bound_A, bound_B, bound_D_uni, bound_DD, cauchy_K
from .parse import ParseError, format_polynomial, parse
from .certify import (
    SturmSequence,
    count_real_roots,
    is_convex_on_interval,
    is_positive_on_interval,
    isolate_roots,
    min_convexifying_N,
)
from .convexify import (
    ConvexifyCertificate,
    coercive_augment,
    convexify_on_compact,
    falsify_convexity,
    leading_form_positive,
    phi_N,
    script_N,
    sylvester_psd,
)
from .sets import Ball, BasicSet, Box, Halfspaces, parse_set
from .shift import build_shift, shift_params, verify_shift, weierstrass_phi

__version__ = "0.1.0"
