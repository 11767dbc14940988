"""Explicit lower bounds for the first nontrivial Neumann eigenvalue of the
degenerate p-Laplacian on planar non-convex domains, with a finite-element
Rayleigh-quotient oracle for independent verification."""

from .domains import (
    ConformalDomain,
    PolygonalCurve,
    QuasidiscSpec,
    SnowflakeParams,
    boundary_polyline,
    generate_rohde_snowflake,
    make_epicycloid,
    make_quasidisc_spec,
    make_spiral_spec,
    make_star_spec,
    make_unit_disc,
    unit_square,
)
from .curves import (
    CurveMetrics,
    ahlfors_constant,
    bounded_turning_constant,
    curve_metrics,
    polygon_area,
    polygon_diameter,
)
from .quadrature import DiscRule, area, build_rule, composition_norm, lalpha_norm
from .bounds import (
    BoundReport,
    LogReal,
    ahlfors_bound,
    alpha_constant,
    delta_exponent,
    extension_coefficient_log,
    inverse_holder_constant,
    jacobian_nu,
    nu_unit_root,
    quasidisc_bound,
    quasidisc_factor,
    regularity_bound,
    regularity_constant,
    snowflake_bound,
    szego_weinberger_upper,
)
from .errors import (
    AccuracyError,
    ConstructionError,
    ConvergenceError,
    InconsistencyError,
    InfeasibleError,
    MeshError,
    ParameterError,
    PlbError,
)
from .meshing import Mesh, triangulate
from .eigensolver import (
    MinimizeResult,
    P1Operators,
    VerificationReport,
    laplace_reference,
    rayleigh_minimize,
    verify_bound,
)

__version__ = "0.1.0"
