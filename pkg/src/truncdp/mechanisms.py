"""The randomized release algorithms: clip, add noise, keep only [a, b].

Each release clips the query output to [0, sensitivity], adds the mechanism's
noise, and -- if the noisy value falls outside the truncation interval --
resamples until it lands inside. Two interchangeable samplers are provided:

* ``rejection``: the literal resample-until-inside loop (the reference
  semantics; its attempt count is geometric with mean 1/mass);
* ``inverse-cdf``: a single quantile-transform draw from the truncated
  distribution (the production default; always one attempt).

Both are exact samplers of the same truncated law; the test suite holds them
to a two-sample KS comparison at n = 1e5.

Randomness is injected as a numpy Generator so every draw is reproducible
from a seed. This is not a cryptographic RNG; see the README deployment
notes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from truncdp.accountant import GaussianParams, LaplaceParams
from truncdp.distributions import TruncGaussian, TruncLaplace
from truncdp.errors import AttemptsExceeded, InvalidParams

DEFAULT_MAX_ATTEMPTS = 1_000_000

METHODS = ("inverse-cdf", "rejection")


@dataclass(frozen=True)
class ReleaseRecord:
    """One released value plus how many noise draws it took."""

    released_value: float
    attempts: int
    mechanism: str


def clip_output(y: float, sensitivity: float) -> float:
    """min(max(y, 0), sensitivity): pin the query output to its sensitivity range."""
    if not (math.isfinite(sensitivity) and sensitivity > 0.0):
        raise InvalidParams(f"sensitivity must be finite and > 0, got {sensitivity}")
    if not math.isfinite(y):
        raise InvalidParams(f"query output must be finite, got {y}")
    return min(max(y, 0.0), sensitivity)


def _open_unit_uniform(rng: np.random.Generator, n: int) -> np.ndarray:
    # exclusive on both ends, as inverse_cdf requires
    return rng.integers(1, 1 << 53, size=n).astype(float) / float(1 << 53)


def _release_many(dist, noise_draw, rng, n: int, method: str, max_attempts: int):
    if n < 1:
        raise InvalidParams(f"need n >= 1 releases, got {n}")
    if max_attempts < 1:
        raise InvalidParams(f"max_attempts must be >= 1, got {max_attempts}")
    a, b = dist.interval.a, dist.interval.b
    if method == "inverse-cdf":
        values = np.atleast_1d(dist.inverse_cdf(_open_unit_uniform(rng, n)))
        return values, np.ones(n, dtype=np.int64)
    if method != "rejection":
        raise InvalidParams(f"method must be one of {METHODS}, got {method!r}")
    values = np.empty(n)
    attempts = np.zeros(n, dtype=np.int64)
    pending = np.arange(n)
    for _ in range(max_attempts):
        draws = noise_draw(rng, pending.size)
        attempts[pending] += 1
        ok = (draws >= a) & (draws <= b)
        values[pending[ok]] = draws[ok]
        pending = pending[~ok]
        if pending.size == 0:
            return values, attempts
    raise AttemptsExceeded(
        f"{pending.size} of {n} releases not accepted after {max_attempts} attempts "
        f"(interval mass {math.exp(dist.log_mass):.3e})",
        attempts=max_attempts,
    )


def gaussian_release_many(
    y: float,
    p: GaussianParams,
    rng: np.random.Generator,
    n: int,
    method: str = "inverse-cdf",
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
):
    """n independent Gaussian selective releases of the same query output.

    Returns (values, attempts) arrays. Construction of the truncated target
    raises DegenerateMass up front if the interval mass is below 1e-300.
    """
    center = clip_output(y, p.sensitivity)
    dist = TruncGaussian(center, p.stddev, p.interval)
    noise = lambda r, k: center + p.stddev * r.standard_normal(k)
    return _release_many(dist, noise, rng, n, method, max_attempts)


def laplace_release_many(
    y: float,
    p: LaplaceParams,
    rng: np.random.Generator,
    n: int,
    method: str = "inverse-cdf",
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
):
    """n independent Laplace selective releases of the same query output."""
    center = clip_output(y, p.sensitivity)
    dist = TruncLaplace(center, p.scale, p.interval)
    noise = lambda r, k: r.laplace(center, p.scale, k)
    return _release_many(dist, noise, rng, n, method, max_attempts)


def gaussian_release(
    y: float,
    p: GaussianParams,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    method: str = "inverse-cdf",
) -> ReleaseRecord:
    """One Gaussian selective release of query output y."""
    values, attempts = gaussian_release_many(y, p, rng, 1, method, max_attempts)
    return ReleaseRecord(float(values[0]), int(attempts[0]), "gaussian")


def laplace_release(
    y: float,
    p: LaplaceParams,
    rng: np.random.Generator,
    max_attempts: int = DEFAULT_MAX_ATTEMPTS,
    method: str = "inverse-cdf",
) -> ReleaseRecord:
    """One Laplace selective release of query output y."""
    values, attempts = laplace_release_many(y, p, rng, 1, method, max_attempts)
    return ReleaseRecord(float(values[0]), int(attempts[0]), "laplace")
