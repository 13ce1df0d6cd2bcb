"""Truncated-release differential privacy: mechanisms, accounting, validation.

The package implements additive-noise mechanisms that publish a draw only when
it lands inside a fixed interval, together with a Renyi-DP accountant for the
resulting conditional output distributions, a numerical oracle that checks the
closed forms against direct integration, noise calibration, and a persistent
composition ledger.
"""

from truncdp.accountant import (
    DEFAULT_ALPHA_GRID,
    DpGuarantee,
    GaussianParams,
    LaplaceParams,
    RdpCurve,
    best_epsilon,
    compose,
    gaussian_rdp_curve,
    gaussian_rdp_truncated,
    gaussian_rdp_untruncated,
    laplace_rdp_curve,
    laplace_rdp_truncated,
    laplace_rdp_untruncated,
    rdp_to_dp,
)
from truncdp.calibrate import (
    CalibrationResult,
    CalibrationTarget,
    calibrate_lambda,
    calibrate_sigma,
)
from truncdp.distributions import Interval, TruncGaussian, TruncLaplace
from truncdp.errors import (
    AttemptsExceeded,
    DegenerateMass,
    EmptyCurve,
    InvalidParams,
    MismatchedGrids,
    NoConvergence,
    TruncDpError,
    Unachievable,
)
from truncdp.ledger import PrivacyLedger
from truncdp.mechanisms import (
    ReleaseRecord,
    clip_output,
    gaussian_release,
    gaussian_release_many,
    laplace_release,
    laplace_release_many,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "AttemptsExceeded",
    "CalibrationResult",
    "CalibrationTarget",
    "DEFAULT_ALPHA_GRID",
    "DegenerateMass",
    "DpGuarantee",
    "EmptyCurve",
    "GaussianParams",
    "Interval",
    "InvalidParams",
    "LaplaceParams",
    "MismatchedGrids",
    "NoConvergence",
    "PrivacyLedger",
    "RdpCurve",
    "ReleaseRecord",
    "TruncDpError",
    "TruncGaussian",
    "TruncLaplace",
    "Unachievable",
    "best_epsilon",
    "calibrate_lambda",
    "calibrate_sigma",
    "clip_output",
    "compose",
    "gaussian_rdp_curve",
    "gaussian_rdp_truncated",
    "gaussian_rdp_untruncated",
    "gaussian_release",
    "gaussian_release_many",
    "laplace_rdp_curve",
    "laplace_rdp_truncated",
    "laplace_rdp_untruncated",
    "laplace_release",
    "laplace_release_many",
    "rdp_to_dp",
]
