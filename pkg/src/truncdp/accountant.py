"""Closed-form Renyi-DP accounting for truncated and untruncated release.

Conventions, fixed throughout the package:

* ``sensitivity`` (mu) is both the clipping ceiling and the worst-case shift
  between neighboring datasets: the two extreme output locations are 0 and mu.
* The Gaussian mechanism adds N(0, (mu*sigma)^2); the Laplace mechanism adds
  Lap(0, lambda).
* Selective release truncates the output law to [a, b], so the accountant
  compares two *truncated* distributions whose only difference is location.

All mass ratios are evaluated in log space via log_phi_diff; the truncated
Gaussian orders up to alpha = 64 involve interval masses under location
shifts like (1 - alpha) * mu, whose logs reach the -10^4 range and whose
linear-space values do not exist in binary64.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from truncdp.distributions import Interval, TruncLaplace
from truncdp.errors import DegenerateMass, EmptyCurve, InvalidParams, MismatchedGrids
from truncdp.normal import log1mexp, log_phi_diff

#: Orders used when no explicit grid is given: a geometric ladder into the
#: low-order regime where the DP conversion usually minimizes, plus integer
#: orders 2..64.
DEFAULT_ALPHA_GRID: tuple[float, ...] = tuple(
    sorted({1.0 + 2.0**k / 10.0 for k in range(7)} | {float(n) for n in range(2, 65)})
)

DIRECTIONS = ("forward", "reverse", "symmetric-max")

#: Provenance tags attached to per-alpha values.
CASE_CLOSED = "closed-form"


def _check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not (math.isfinite(alpha) and alpha > 1.0):
        raise InvalidParams(f"Renyi order must be finite and > 1, got {alpha}")
    return alpha


def _check_positive(name: str, value: float) -> float:
    value = float(value)
    if not (math.isfinite(value) and value > 0.0):
        raise InvalidParams(f"{name} must be finite and > 0, got {value}")
    return value


@dataclass(frozen=True)
class GaussianParams:
    """Gaussian release: clip to [0, sensitivity], add N(0, (sensitivity*noise_multiplier)^2), keep [a,b]."""

    sensitivity: float
    noise_multiplier: float
    interval: Interval

    def __post_init__(self):
        _check_positive("sensitivity", self.sensitivity)
        _check_positive("noise_multiplier", self.noise_multiplier)

    @property
    def stddev(self) -> float:
        """Effective noise standard deviation."""
        return self.sensitivity * self.noise_multiplier


@dataclass(frozen=True)
class LaplaceParams:
    """Laplace release: clip to [0, sensitivity], add Lap(0, scale), keep [a,b]."""

    sensitivity: float
    scale: float
    interval: Interval

    def __post_init__(self):
        _check_positive("sensitivity", self.sensitivity)
        _check_positive("scale", self.scale)


def gaussian_rdp_untruncated(alpha: float, sigma: float) -> float:
    """RDP of the plain Gaussian mechanism: alpha / (2 sigma^2)."""
    alpha = _check_alpha(alpha)
    sigma = _check_positive("sigma", sigma)
    return alpha / (2.0 * sigma * sigma)


def laplace_rdp_untruncated(alpha: float, mu: float, lam: float) -> float:
    """RDP of the plain Laplace mechanism with sensitivity mu and scale lam.

    (1/(alpha-1)) * log( alpha/(2a-1) e^{mu(alpha-1)/lam}
                         + (alpha-1)/(2a-1) e^{-mu alpha/lam} ),  a = alpha.
    """
    alpha = _check_alpha(alpha)
    mu = _check_positive("mu", mu)
    lam = _check_positive("lam", lam)
    denom = 2.0 * alpha - 1.0
    t1 = math.log(alpha / denom) + mu * (alpha - 1.0) / lam
    t2 = math.log((alpha - 1.0) / denom) - mu * alpha / lam
    return np.logaddexp(t1, t2) / (alpha - 1.0)


def _log_shifted_mass(c: float, p: GaussianParams) -> float:
    """log of the [a,b] mass under N(c * sensitivity, stddev^2)."""
    s = p.stddev
    shift = c * p.sensitivity
    lm = log_phi_diff((p.interval.a - shift) / s, (p.interval.b - shift) / s)
    if not math.isfinite(lm):
        raise DegenerateMass(
            f"interval mass under location shift {shift:g} underflows; "
            f"truncated RDP at this order is not representable in binary64"
        )
    return lm


def gaussian_log_correction(alpha: float, p: GaussianParams, direction: str) -> float:
    """log of the truncation correction factor for one direction; always <= 0.

    The directed divergence decomposes as alpha/(2 sigma^2) plus this
    correction divided by (alpha - 1). With L(c) the log interval mass under
    location shift c*mu:

        forward  (released on 0-side vs mu-side):
            (alpha-1) L(1) + L(1-alpha) - alpha L(0)
        reverse:
            (alpha-1) L(0) + L(alpha)   - alpha L(1)

    Both are the logs of the quantities shown to be <= 1 in the bound check
    suite, which is exactly why truncation never costs privacy.
    """
    alpha = _check_alpha(alpha)
    l0 = _log_shifted_mass(0.0, p)
    l1 = _log_shifted_mass(1.0, p)
    if direction == "forward":
        return (alpha - 1.0) * l1 + _log_shifted_mass(1.0 - alpha, p) - alpha * l0
    if direction == "reverse":
        return (alpha - 1.0) * l0 + _log_shifted_mass(alpha, p) - alpha * l1
    raise InvalidParams(f"direction must be 'forward' or 'reverse', got {direction!r}")


def gaussian_rdp_truncated(alpha: float, p: GaussianParams, direction: str = "symmetric-max") -> float:
    """Closed-form RDP of the truncated Gaussian release at order alpha.

    direction 'forward' compares release-at-0 against release-at-mu,
    'reverse' the opposite, 'symmetric-max' (default) the worse of the two,
    which is what a DP guarantee must quote.
    """
    alpha = _check_alpha(alpha)
    base = alpha / (2.0 * p.noise_multiplier**2)
    if direction == "symmetric-max":
        return base + max(
            gaussian_log_correction(alpha, p, "forward"),
            gaussian_log_correction(alpha, p, "reverse"),
        ) / (alpha - 1.0)
    if direction in ("forward", "reverse"):
        return base + gaussian_log_correction(alpha, p, direction) / (alpha - 1.0)
    raise InvalidParams(f"direction must be one of {DIRECTIONS}, got {direction!r}")


@dataclass(frozen=True)
class LaplaceRdp:
    """A truncated-Laplace RDP value plus which geometry produced it."""

    value: float
    case: str  # "I", "II", "III", or "numeric"


def laplace_rdp_truncated(alpha: float, p: LaplaceParams, *, quad_tol: float = 1e-11) -> LaplaceRdp:
    """RDP of the truncated Laplace release at order alpha, tagged by geometry.

    * Case I  (b < 0):  both truncated laws are the same exponential slope,
      renormalized identically -> exactly 0.
    * Case II (a > mu): same on the other side -> exactly 0.
    * Case III (0 < a < b < mu): closed form in t0 = e^{-(b-a)/lambda}:
          (1/(alpha-1)) log[ (t0^{1-alpha} - t0^alpha) / ((2 alpha - 1)(1 - t0)) ]
      The value depends only on (b-a)/lambda and is the same in both
      directions.
    * anything else (interval straddles 0 or mu): no closed form is claimed;
      the numerical divergence oracle supplies the value (max of the two
      directions), tagged "numeric".
    """
    alpha = _check_alpha(alpha)
    a, b = p.interval.a, p.interval.b
    mu = p.sensitivity
    if b < 0.0:
        return LaplaceRdp(0.0, "I")
    if a > mu:
        return LaplaceRdp(0.0, "II")
    if 0.0 < a and b < mu:
        w = (b - a) / p.scale
        log_num = (alpha - 1.0) * w + log1mexp(-(2.0 * alpha - 1.0) * w)
        log_den = math.log(2.0 * alpha - 1.0) + log1mexp(-w)
        return LaplaceRdp((log_num - log_den) / (alpha - 1.0), "III")
    # geometry outside the closed-form cases: defer to the oracle
    from truncdp import oracle  # local import; oracle depends on this module

    d0 = TruncLaplace(0.0, p.scale, p.interval)
    d1 = TruncLaplace(mu, p.scale, p.interval)
    fwd = oracle.renyi_divergence_quadrature(d0, d1, alpha, tol=quad_tol).value
    rev = oracle.renyi_divergence_quadrature(d1, d0, alpha, tol=quad_tol).value
    value = max(fwd, rev)
    if -1e-9 < value < 0.0:
        value = 0.0
    return LaplaceRdp(value, "numeric")


def rdp_to_dp(rdp: float, alpha: float, delta: float) -> float:
    """Convert an (alpha, rdp) guarantee to epsilon at the given delta.

    epsilon = R + log((alpha-1)/alpha) - (log(delta) + log(alpha)) / (alpha-1)
    """
    alpha = _check_alpha(alpha)
    if not (math.isfinite(rdp) and rdp >= 0.0):
        raise InvalidParams(f"rdp must be finite and >= 0, got {rdp}")
    if not (0.0 < delta < 1.0):
        raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
    return rdp + math.log((alpha - 1.0) / alpha) - (math.log(delta) + math.log(alpha)) / (alpha - 1.0)


@dataclass(frozen=True)
class RdpCurve:
    """An RDP guarantee sampled on a finite grid of orders."""

    alphas: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.alphas) != len(self.values):
            raise InvalidParams("alphas and values must have equal length")
        for a in self.alphas:
            _check_alpha(a)
        if any(x >= y for x, y in zip(self.alphas, self.alphas[1:])):
            raise InvalidParams("alphas must be strictly increasing")
        for v in self.values:
            if not (math.isfinite(v) and v >= 0.0):
                raise InvalidParams(f"rdp values must be finite and >= 0, got {v}")

    @classmethod
    def from_points(cls, points) -> "RdpCurve":
        """Build a curve from (alpha, rdp) pairs: sorts, deduplicates equal
        alphas keeping the smaller (tighter) rdp, and clamps rounding-level
        negatives (> -1e-9) to zero."""
        best: dict[float, float] = {}
        for alpha, value in points:
            alpha = _check_alpha(alpha)
            value = float(value)
            if -1e-9 < value < 0.0:
                value = 0.0
            if alpha not in best or value < best[alpha]:
                best[alpha] = value
        alphas = tuple(sorted(best))
        return cls(alphas, tuple(best[a] for a in alphas))

    def __len__(self) -> int:
        return len(self.alphas)


@dataclass(frozen=True)
class DpGuarantee:
    """(epsilon, delta) plus the order that realized the minimum."""

    epsilon: float
    delta: float
    realized_alpha: float


def best_epsilon(curve: RdpCurve, delta: float) -> DpGuarantee:
    """Convert every grid point and return the smallest epsilon (ties -> smaller alpha)."""
    if len(curve) == 0:
        raise EmptyCurve("cannot convert an empty RDP curve")
    best_eps = math.inf
    best_alpha = None
    for alpha, value in zip(curve.alphas, curve.values):
        eps = rdp_to_dp(value, alpha, delta)
        if eps < best_eps:
            best_eps = eps
            best_alpha = alpha
    return DpGuarantee(best_eps, float(delta), best_alpha)


def compose(curves) -> RdpCurve:
    """Pointwise-sum RDP curves over a shared alpha grid (sequential releases)."""
    curves = list(curves)
    if not curves:
        raise EmptyCurve("compose needs at least one curve")
    grid = curves[0].alphas
    total = np.zeros(len(grid))
    for c in curves:
        if c.alphas != grid:
            raise MismatchedGrids(f"alpha grids differ: {c.alphas[:3]}... vs {grid[:3]}...")
        total += np.asarray(c.values)
    return RdpCurve(grid, tuple(float(v) for v in total))


def gaussian_rdp_curve(
    p: GaussianParams,
    alphas=None,
    direction: str = "symmetric-max",
) -> tuple[RdpCurve, tuple[str, ...]]:
    """Truncated-Gaussian RDP on a grid, with per-order provenance tags."""
    grid = _normalize_grid(alphas)
    values = [gaussian_rdp_truncated(a, p, direction) for a in grid]
    curve = RdpCurve.from_points(zip(grid, values))
    return curve, (CASE_CLOSED,) * len(curve)


def laplace_rdp_curve(p: LaplaceParams, alphas=None) -> tuple[RdpCurve, tuple[str, ...]]:
    """Truncated-Laplace RDP on a grid, with per-order case tags."""
    grid = _normalize_grid(alphas)
    results = [laplace_rdp_truncated(a, p) for a in grid]
    curve = RdpCurve.from_points((a, r.value) for a, r in zip(grid, results))
    return curve, tuple(r.case for r in results)


def _normalize_grid(alphas) -> tuple[float, ...]:
    """Sorted-unique order grid (so curves and tags stay index-aligned)."""
    source = alphas if alphas is not None else DEFAULT_ALPHA_GRID
    return tuple(sorted({_check_alpha(a) for a in source}))
