"""Truncated Gaussian and Laplace distributions on a finite interval.

These are the exact output distributions of the selective-release mechanisms:
a parent density restricted to [a, b] and renormalized. Densities, CDFs and
inverse CDFs are written to stay accurate when the interval sits far out in a
tail of the parent, which is exactly where the interesting privacy regimes
live. Construction fails with DegenerateMass once the interval mass drops
below 1e-300: past that point doubles cannot represent the normalization and
every downstream number would be noise.

All evaluators accept scalars or numpy arrays and return matching shapes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import special

from truncdp.errors import DegenerateMass, InvalidParams
from truncdp.normal import log1mexp, log_phi_diff

MIN_MASS = 1e-300
_MIN_LOG_MASS = math.log(MIN_MASS)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)
_SQRT2 = math.sqrt(2.0)


@dataclass(frozen=True)
class Interval:
    """A non-degenerate finite interval [a, b]."""

    a: float
    b: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b)):
            raise InvalidParams(f"interval bounds must be finite, got [{self.a}, {self.b}]")
        if not self.a < self.b:
            raise InvalidParams(f"need a < b, got [{self.a}, {self.b}]")

    @property
    def width(self) -> float:
        return self.b - self.a

    def contains(self, x):
        return (np.asarray(x) >= self.a) & (np.asarray(x) <= self.b)


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


class _TruncBase:
    """Shared plumbing: interval geometry, pdf from log_pdf, input checks."""

    interval: Interval
    log_mass: float

    def pdf(self, x):
        arr, scalar = _as_array(x)
        out = np.exp(self.log_pdf(arr))
        return _ret(out, scalar)

    def _check_u(self, u):
        arr, scalar = _as_array(u)
        if np.any(~np.isfinite(arr)) or np.any(arr <= 0.0) or np.any(arr >= 1.0):
            raise InvalidParams("inverse_cdf needs u strictly inside (0, 1)")
        return arr, scalar


@dataclass(frozen=True)
class TruncGaussian(_TruncBase):
    """N(mean, stddev^2) conditioned on the interval [a, b]."""

    mean: float
    stddev: float
    interval: Interval
    log_mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.stddev) and self.stddev > 0.0):
            raise InvalidParams(f"need finite mean and stddev > 0, got mean={self.mean}, stddev={self.stddev}")
        lm = log_phi_diff(self._zlo, self._zhi)
        if not lm >= _MIN_LOG_MASS:
            raise DegenerateMass(
                f"interval [{self.interval.a}, {self.interval.b}] carries mass "
                f"exp({lm:.6g}) < {MIN_MASS:g} under N({self.mean}, {self.stddev}^2)"
            )
        object.__setattr__(self, "log_mass", lm)

    @property
    def _zlo(self) -> float:
        return (self.interval.a - self.mean) / self.stddev

    @property
    def _zhi(self) -> float:
        return (self.interval.b - self.mean) / self.stddev

    @property
    def kinks(self) -> tuple[float, ...]:
        """Interior points where the log-density is not smooth (none here)."""
        return ()

    def log_pdf(self, x):
        arr, scalar = _as_array(x)
        z = (arr - self.mean) / self.stddev
        val = -0.5 * z * z - _LOG_SQRT_2PI - math.log(self.stddev) - self.log_mass
        out = np.where(self.interval.contains(arr), val, -np.inf)
        return _ret(out, scalar)

    def cdf(self, x):
        arr, scalar = _as_array(x)
        z = np.clip((arr - self.mean) / self.stddev, self._zlo, self._zhi)
        zlo, zhi = self._zlo, self._zhi
        if zlo >= 0.0:
            # right tail: survival differences keep relative accuracy
            num = special.ndtr(-zlo) - special.ndtr(-z)
            den = special.ndtr(-zlo) - special.ndtr(-zhi)
        elif zhi <= 0.0:
            num = special.ndtr(z) - special.ndtr(zlo)
            den = special.ndtr(zhi) - special.ndtr(zlo)
        else:
            # straddling zero: erf terms with opposite-sign arguments add
            num = 0.5 * (special.erf(z / _SQRT2) - special.erf(zlo / _SQRT2))
            den = 0.5 * (special.erf(zhi / _SQRT2) - special.erf(zlo / _SQRT2))
        out = np.clip(num / den, 0.0, 1.0)
        return _ret(out, scalar)

    def inverse_cdf(self, u):
        """Quantile transform; the workhorse behind inverse-CDF sampling.

        The target CDF value is formed as a convex combination of the parent's
        CDF (or survival) values at the endpoints, staying in whichever
        representation keeps the numbers away from 1.
        """
        arr, scalar = self._check_u(u)
        zlo, zhi = self._zlo, self._zhi
        if zlo >= 0.0:
            q = special.ndtr(-zlo) * (1.0 - arr) + special.ndtr(-zhi) * arr
            z = -special.ndtri(q)
        else:
            p = special.ndtr(zlo) * (1.0 - arr) + special.ndtr(zhi) * arr
            z = special.ndtri(p)
        x = np.clip(self.mean + self.stddev * z, self.interval.a, self.interval.b)
        return _ret(x, scalar)


def _lap_log_mass(zlo: float, zhi: float) -> float:
    """log P(zlo <= Z <= zhi) for standard Laplace Z, cancellation-free."""
    if zhi <= 0.0:
        return math.log(0.5) + zhi + log1mexp(zlo - zhi)
    if zlo >= 0.0:
        return math.log(0.5) - zlo + log1mexp(zlo - zhi)
    # straddling the peak: 1 - F(zlo) - S(zhi) rewritten as a sum of positives
    mass = 0.5 * (-math.expm1(zlo)) + 0.5 * (-math.expm1(-zhi))
    return math.log(mass)


@dataclass(frozen=True)
class TruncLaplace(_TruncBase):
    """Lap(mean, scale) conditioned on the interval [a, b]."""

    mean: float
    scale: float
    interval: Interval
    log_mass: float = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if not (math.isfinite(self.mean) and math.isfinite(self.scale) and self.scale > 0.0):
            raise InvalidParams(f"need finite mean and scale > 0, got mean={self.mean}, scale={self.scale}")
        lm = _lap_log_mass(self._zlo, self._zhi)
        if not lm >= _MIN_LOG_MASS:
            raise DegenerateMass(
                f"interval [{self.interval.a}, {self.interval.b}] carries mass "
                f"exp({lm:.6g}) < {MIN_MASS:g} under Lap({self.mean}, {self.scale})"
            )
        object.__setattr__(self, "log_mass", lm)

    @property
    def _zlo(self) -> float:
        return (self.interval.a - self.mean) / self.scale

    @property
    def _zhi(self) -> float:
        return (self.interval.b - self.mean) / self.scale

    @property
    def kinks(self) -> tuple[float, ...]:
        """The density has a kink at the location parameter if it is interior."""
        if self.interval.a < self.mean < self.interval.b:
            return (self.mean,)
        return ()

    def log_pdf(self, x):
        arr, scalar = _as_array(x)
        z = (arr - self.mean) / self.scale
        val = -np.abs(z) - math.log(2.0 * self.scale) - self.log_mass
        out = np.where(self.interval.contains(arr), val, -np.inf)
        return _ret(out, scalar)

    def cdf(self, x):
        arr, scalar = _as_array(x)
        z = np.clip((arr - self.mean) / self.scale, self._zlo, self._zhi)
        zlo, zhi = self._zlo, self._zhi
        if zhi <= 0.0:
            num = np.expm1(z - zlo)
            den = np.expm1(zhi - zlo)
        elif zlo >= 0.0:
            num = np.expm1(zlo - z)
            den = np.expm1(zlo - zhi)
        else:
            num = np.where(
                z <= 0.0,
                0.5 * np.exp(zlo) * np.expm1(np.minimum(z, 0.0) - zlo),
                0.5 * (-np.expm1(zlo)) + 0.5 * (-np.expm1(-np.maximum(z, 0.0))),
            )
            den = 0.5 * (-np.expm1(zlo)) + 0.5 * (-np.expm1(-zhi))
        out = np.clip(num / den, 0.0, 1.0)
        return _ret(out, scalar)

    def inverse_cdf(self, u):
        arr, scalar = self._check_u(u)
        zlo, zhi = self._zlo, self._zhi
        if zhi <= 0.0:
            # parent CDF is 0.5 e^z here; interpolate in log space
            z = zhi + np.log(arr + (1.0 - arr) * math.exp(zlo - zhi))
        elif zlo >= 0.0:
            # survival side, mirrored
            z = zlo - np.log((1.0 - arr) + arr * math.exp(zlo - zhi))
        else:
            f_lo = 0.5 * math.exp(zlo)
            s_hi = 0.5 * math.exp(-zhi)
            p = f_lo * (1.0 - arr) + (1.0 - s_hi) * arr
            s = (1.0 - f_lo) * (1.0 - arr) + s_hi * arr
            z = np.where(p <= 0.5, np.log(2.0 * np.maximum(p, MIN_MASS)), -np.log(2.0 * np.maximum(s, MIN_MASS)))
        x = np.clip(self.mean + self.scale * z, self.interval.a, self.interval.b)
        return _ret(x, scalar)


def trunc_gaussian_pdf(d: TruncGaussian, x):
    """Density of the truncated Gaussian d at x (free-function form of d.pdf)."""
    return d.pdf(x)


def trunc_laplace_pdf(d: TruncLaplace, x):
    """Density of the truncated Laplace d at x (free-function form of d.pdf)."""
    return d.pdf(x)


def trunc_inverse_cdf(d, u):
    """Quantile function of a truncated distribution (free-function form of d.inverse_cdf)."""
    return d.inverse_cdf(u)
