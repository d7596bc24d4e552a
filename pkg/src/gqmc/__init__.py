"""Low-cardinality cubature points on Grassmannians.

Design construction by Riemannian conjugate gradient on the trace-moment
energy, exact worst-case integration errors in two trace-kernel RKHSs, and
probe-based covering-radius estimation, with a seeded experiment CLI.
"""

from .backend import BACKEND
from .covering import (
    CoveringEstimate,
    ball_volume,
    covering_radius_estimate,
    expected_random_covering,
    grassmann_volume,
    multivariate_gamma,
    slope_fit,
)
from .design import (
    DesignProblem,
    DesignResult,
    cg_minimize,
    design_strength,
    energy,
    energy_gradient,
    n_schedule,
    verify_design,
)
from .kernels import (
    G24,
    PointConfiguration,
    TraceKernel,
    WceReport,
    expected_random_wce,
    kernel_k1,
    kernel_k2,
    khat0_monte_carlo,
    khat0_quadrature,
    moment_constant,
    random_wce_constant,
    shi,
    wce_squared,
)
from .manifold import (
    GrassmannSpace,
    PrincipalAngles,
    Projector,
    TangentVector,
    geodesic_distance,
    principal_angles,
    random_projector,
    read_projectors,
    retract,
    tangent_project,
    trace_inner,
    validate_projector,
    write_projectors,
)

__version__ = "0.1.0"
