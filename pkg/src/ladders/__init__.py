"""Ladder schemes (Schild, pole, averaged Schild, fanning) for parallel
transport on S², SPD(3) and SE(3), with closed-form and RK4-based backends
and a convergence-rate harness.
"""

from .core import (
    DEFAULT_TOLERANCES,
    CurvatureOracle,
    Manifold,
    ManifoldPoint,
    MetricChart,
    TangentVector,
    ToleranceConfig,
    inner,
    pole_error_prediction,
    schild_error_prediction,
)
from .exceptions import *  # noqa: F401,F403
from .kernels import BACKEND as KERNEL_BACKEND
from .ladders import (
    LadderConfig,
    TransportResult,
    averaged_schild_step,
    fanning_step,
    pole_step,
    schild_step,
    transport,
    transport_reference,
)
from .lab import (
    ConvergenceReport,
    ExperimentSpec,
    REPORT_SCHEMA,
    emit_report,
    fit_slope,
    longitudinal_error,
    read_report,
    run_experiment,
)
from .ode import GeodesicState, RkCallCounter, integrate_geodesic, rk4_step, rk_inverse
from .se3 import SE3
from .spd import SPD
from .sphere import Sphere

__version__ = "0.1.0"
