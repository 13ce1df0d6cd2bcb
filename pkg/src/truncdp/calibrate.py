"""Inverse accounting: find the smallest noise parameter meeting (epsilon, delta).

Bisection over sigma (Gaussian) or lambda (Laplace) in the bracket
[1e-3, 1e3], composing ``steps`` identical releases and converting through
best_epsilon each probe. The achieved epsilon is monotone decreasing in the
noise parameter for ordinary geometries; because nobody has proved that for
every truncated geometry, the bracket endpoints are sanity-checked and a
non-monotone reading falls back to a log-spaced scan before refining.

Truncation can also make noise irrelevant: an interval entirely outside the
signal range (Laplace Cases I/II, or a Gaussian interval so remote that both
neighboring laws collapse onto its edge) costs zero RDP at any noise level.
Such targets return the bracket minimum with free=True.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from truncdp import accountant
from truncdp.accountant import GaussianParams, LaplaceParams, best_epsilon, compose
from truncdp.distributions import Interval
from truncdp.errors import DegenerateMass, InvalidParams, NoConvergence, Unachievable

BRACKET = (1e-3, 1e3)
REL_TOL = 1e-6
MAX_ITERS = 60
_SCAN_POINTS = 120


@dataclass(frozen=True)
class CalibrationTarget:
    """What to hit: (epsilon, delta) after `steps` composed releases."""

    epsilon: float
    delta: float
    steps: int
    mechanism: str  # "gaussian" or "laplace"
    sensitivity: float
    interval: Interval

    def __post_init__(self):
        if not (math.isfinite(self.epsilon) and self.epsilon > 0.0):
            raise InvalidParams(f"target epsilon must be > 0, got {self.epsilon}")
        if not (0.0 < self.delta < 1.0):
            raise InvalidParams(f"delta must lie in (0, 1), got {self.delta}")
        if self.steps < 1:
            raise InvalidParams(f"steps must be >= 1, got {self.steps}")
        if self.mechanism not in ("gaussian", "laplace"):
            raise InvalidParams(f"mechanism must be gaussian or laplace, got {self.mechanism!r}")
        if not (math.isfinite(self.sensitivity) and self.sensitivity > 0.0):
            raise InvalidParams(f"sensitivity must be > 0, got {self.sensitivity}")


@dataclass(frozen=True)
class CalibrationResult:
    """Calibrated parameter and the guarantee it actually achieves.

    free=True means the geometry already costs zero RDP, so any value in the
    bracket works and the minimum is returned.
    """

    parameter: str  # "sigma" or "lambda"
    value: float
    achieved_epsilon: float
    free: bool
    iterations: int


def _epsilon_at(t: CalibrationTarget, x: float, alphas) -> float:
    """Achieved epsilon with noise parameter x; +inf if x is infeasible there."""
    try:
        if t.mechanism == "gaussian":
            curve, _ = accountant.gaussian_rdp_curve(GaussianParams(t.sensitivity, x, t.interval), alphas)
        else:
            curve, _ = accountant.laplace_rdp_curve(LaplaceParams(t.sensitivity, x, t.interval), alphas)
    except DegenerateMass:
        return math.inf
    total = compose([curve] * t.steps)
    return best_epsilon(total, t.delta).epsilon


def _calibrate(t: CalibrationTarget, parameter: str, alphas) -> CalibrationResult:
    lo, hi = BRACKET
    eps_hi = _epsilon_at(t, hi, alphas)
    if not eps_hi <= t.epsilon:
        raise Unachievable(
            f"even {parameter} = {hi:g} achieves only epsilon = {eps_hi:.6g} "
            f"> target {t.epsilon:.6g} (delta = {t.delta:g}, steps = {t.steps})",
            best_epsilon=eps_hi,
        )
    eps_lo = _epsilon_at(t, lo, alphas)
    iterations = 0
    if eps_lo <= t.epsilon:
        # the whole bracket is feasible
        if math.isfinite(eps_lo) and abs(eps_lo - eps_hi) <= 1e-9 * max(1.0, abs(eps_hi)):
            # flat curve: the truncation geometry makes noise irrelevant
            return CalibrationResult(parameter, lo, eps_lo, True, iterations)
        return CalibrationResult(parameter, lo, eps_lo, False, iterations)
    if not eps_lo > eps_hi:
        # not decreasing across the bracket: locate a feasible left edge by scan
        lo, hi = _scan_bracket(t, alphas)
    while hi / lo - 1.0 > REL_TOL:
        iterations += 1
        if iterations > MAX_ITERS:
            raise NoConvergence(f"calibration bisection exceeded {MAX_ITERS} iterations")
        mid = math.sqrt(lo * hi)
        if _epsilon_at(t, mid, alphas) <= t.epsilon:
            hi = mid
        else:
            lo = mid
    return CalibrationResult(parameter, hi, _epsilon_at(t, hi, alphas), False, iterations)


def _scan_bracket(t: CalibrationTarget, alphas):
    """Fallback for non-monotone epsilon(parameter): grid-scan for the first crossing."""
    xs = np.geomspace(BRACKET[0], BRACKET[1], _SCAN_POINTS)
    feasible = [i for i, x in enumerate(xs) if _epsilon_at(t, x, alphas) <= t.epsilon]
    if not feasible:
        raise Unachievable("no parameter in the bracket meets the target", best_epsilon=None)
    i = feasible[0]
    if i == 0:
        return xs[0], xs[0] * (1.0 + REL_TOL)
    return xs[i - 1], xs[i]


def calibrate_sigma(t: CalibrationTarget, alphas=None) -> CalibrationResult:
    """Smallest noise multiplier sigma meeting the Gaussian target."""
    if t.mechanism != "gaussian":
        raise InvalidParams("calibrate_sigma needs a gaussian target")
    return _calibrate(t, "sigma", alphas)


def calibrate_lambda(t: CalibrationTarget, alphas=None) -> CalibrationResult:
    """Smallest noise scale lambda meeting the Laplace target."""
    if t.mechanism != "laplace":
        raise InvalidParams("calibrate_lambda needs a laplace target")
    return _calibrate(t, "lambda", alphas)
