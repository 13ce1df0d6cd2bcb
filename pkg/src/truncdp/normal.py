"""Standard-normal CDF helpers that stay accurate in the far tails.

The accountant's closed forms need log(Phi(hi) - Phi(lo)) for z-scores as far
out as +-100, where Phi itself underflows or rounds to 1. Everything here is
built on scipy.special's ndtr/log_ndtr/ndtri, which are accurate over the full
double range; the branch logic below just avoids catastrophic cancellation in
the *difference*.
"""

from __future__ import annotations

import math

from scipy import special

from truncdp.errors import InvalidParams

_SQRT2 = math.sqrt(2.0)
_LN2 = math.log(2.0)


def std_normal_cdf(x):
    """Phi(x), vectorized."""
    return special.ndtr(x)


def std_normal_log_cdf(x):
    """log Phi(x), accurate for very negative x."""
    return special.log_ndtr(x)


def std_normal_ppf(p):
    """Phi^{-1}(p)."""
    return special.ndtri(p)


def log1mexp(t: float) -> float:
    """log(1 - e^t) for t <= 0, switching forms at -ln 2 to keep full precision.

    Returns -inf at t == 0 (the difference underflowed to zero mass).
    """
    if t > 0.0:
        raise InvalidParams(f"log1mexp needs t <= 0, got {t}")
    if t == 0.0:
        return -math.inf
    if t > -_LN2:
        return math.log(-math.expm1(t))
    return math.log1p(-math.exp(t))


def log_phi_diff(lo: float, hi: float) -> float:
    """log(Phi(hi) - Phi(lo)) without cancellation, for lo < hi.

    Three regimes:
      * interval entirely in the left tail: mirror into the right tail;
      * entirely in the right tail: work with survival functions, whose logs
        log_ndtr(-z) are exact, and peel the smaller one off the larger with
        log1mexp;
      * straddling zero: Phi(hi) - Phi(lo) = (erf(hi/sqrt2) + erf(-lo/sqrt2))/2
        is a sum of nonnegative terms, so the plain expression is fine.

    Returns -inf if the mass underflows double precision entirely.
    """
    if not (lo < hi):
        raise InvalidParams(f"log_phi_diff needs lo < hi, got [{lo}, {hi}]")
    if hi <= 0.0:
        lo, hi = -hi, -lo
    if lo >= 0.0:
        log_q_lo = float(special.log_ndtr(-lo))
        log_q_hi = float(special.log_ndtr(-hi))
        if log_q_lo == -math.inf:
            # even the larger survival mass is zero to double precision
            return -math.inf
        return log_q_lo + log1mexp(min(log_q_hi - log_q_lo, 0.0))
    mass = 0.5 * (special.erf(hi / _SQRT2) + special.erf(-lo / _SQRT2))
    return math.log(mass)
