"""Adaptive Gauss-Kronrod quadrature for integrands given in log space.

The divergence oracle integrates p(x)^alpha q(x)^(1-alpha), whose values span
thousands of orders of magnitude once alpha reaches 64 or the truncation
interval sits in a far tail. Linear-space integrators (scipy.integrate.quad)
silently underflow there, so this engine works with log f throughout: each
panel is evaluated with a 15-point Kronrod rule under a per-panel max shift,
panels are combined with log-sum-exp, and the embedded 7-point Gauss rule
supplies the error estimate.

Refinement is wave-based: every round, all panels whose error exceeds their
share of the budget are split in half and all children are evaluated in one
vectorized call.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from truncdp.errors import InvalidParams, NoConvergence

# 15-point Kronrod rule with embedded 7-point Gauss rule (standard QUADPACK
# dqk15 abscissae/weights, positive half).
_XGK_POS = (
    0.9914553711208126,
    0.9491079123427585,
    0.8648644233597691,
    0.7415311855993944,
    0.5860872354676911,
    0.4058451513773972,
    0.2077849550078985,
)
_WGK = (
    0.02293532201052922,
    0.06309209262997855,
    0.10479001032225018,
    0.14065325971552592,
    0.16900472663926790,
    0.19035057806478541,
    0.20443294007529889,
    0.20948214108472783,  # center
)
_WG = (
    0.12948496616886969,
    0.27970539148927667,
    0.38183005050511894,
    0.41795918367346939,  # center
)


def _build_rule():
    nodes = np.array([-x for x in _XGK_POS] + [0.0] + [x for x in reversed(_XGK_POS)])
    wk = np.array(list(_WGK[:7]) + [_WGK[7]] + list(reversed(_WGK[:7])))
    wg = np.zeros(15)
    # Gauss nodes are every second Kronrod node: indices 1,3,5,7,9,11,13
    gauss_w = list(_WG[:3]) + [_WG[3]] + list(reversed(_WG[:3]))
    wg[1:14:2] = gauss_w
    return nodes, wk, wg


_NODES, _WK, _WG_FULL = _build_rule()


@dataclass(frozen=True)
class LogIntegralResult:
    """log of the integral, its estimated relative error, and the work done."""

    log_value: float
    rel_error: float
    evaluations: int
    panels: int


def _eval_panels(log_f, lo: np.ndarray, hi: np.ndarray):
    """Kronrod-evaluate a batch of panels; returns (log_integral, log_error) arrays."""
    mid = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xs = mid[:, None] + half[:, None] * _NODES[None, :]
    lf = np.asarray(log_f(xs.ravel()), dtype=float).reshape(xs.shape)
    if np.any(np.isnan(lf)) or np.any(np.isposinf(lf)):
        raise InvalidParams("log integrand returned NaN or +inf")
    m = np.max(lf, axis=1)
    log_int = np.full(lo.shape, -np.inf)
    log_err = np.full(lo.shape, -np.inf)
    ok = np.isfinite(m)
    if np.any(ok):
        fs = np.exp(lf[ok] - m[ok, None])
        k15 = fs @ _WK
        g7 = fs @ _WG_FULL
        with np.errstate(divide="ignore"):
            log_int[ok] = m[ok] + np.log(half[ok] * k15)
            log_err[ok] = m[ok] + np.log(half[ok] * np.abs(k15 - g7))
    return log_int, log_err


def _logsumexp(values: np.ndarray) -> float:
    m = np.max(values) if values.size else -np.inf
    if not np.isfinite(m):
        return float(m) if values.size else -np.inf
    return float(m + np.log(np.sum(np.exp(values - m))))


def log_integral(
    log_f,
    lo: float,
    hi: float,
    *,
    rel_tol: float = 1e-12,
    max_evals: int = 1_000_000,
    breakpoints: tuple[float, ...] = (),
    min_panels: int = 8,
    max_rounds: int = 60,
) -> LogIntegralResult:
    """Compute log(integral of exp(log_f) over [lo, hi]) adaptively.

    log_f must accept a 1-D numpy array of interior points and return the
    elementwise log-integrand (-inf is fine, +inf/NaN are errors). breakpoints
    marks interior kinks (e.g. the peak of a Laplace density); they become
    panel edges so every panel sees a smooth integrand.

    Raises NoConvergence if the evaluation budget runs out, or if further
    splitting cannot help (panels at floating-point width) while the estimated
    relative error still exceeds rel_tol.
    """
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise InvalidParams(f"need finite lo < hi, got [{lo}, {hi}]")
    if rel_tol <= 0:
        raise InvalidParams("rel_tol must be positive")

    edges = [lo] + sorted(b for b in set(breakpoints) if lo < b < hi) + [hi]
    # split segments uniformly until we have at least min_panels
    seg = []
    total = hi - lo
    for left, right in zip(edges[:-1], edges[1:]):
        parts = max(1, round(min_panels * (right - left) / total))
        step = (right - left) / parts
        seg.extend(left + i * step for i in range(parts))
    seg.append(hi)
    los = np.array(seg[:-1])
    his = np.array(seg[1:])

    log_ints, log_errs = _eval_panels(log_f, los, his)
    evaluations = 15 * los.size
    frozen = np.zeros(los.size, dtype=bool)

    for _ in range(max_rounds):
        log_total = _logsumexp(log_ints)
        log_err_total = _logsumexp(log_errs)
        if log_total == -np.inf:
            # integrand numerically zero everywhere; nothing more to resolve
            return LogIntegralResult(-np.inf, 0.0, evaluations, los.size)
        rel = math.exp(min(log_err_total - log_total, 700.0))
        if rel <= rel_tol:
            return LogIntegralResult(log_total, rel, evaluations, los.size)
        if evaluations >= max_evals:
            break
        # split every panel above its equidistributed error share
        share = log_total + math.log(rel_tol) - math.log(2.0 * los.size)
        split = (log_errs > share) & ~frozen
        if not np.any(split):
            worst = int(np.argmax(np.where(frozen, -np.inf, log_errs)))
            if frozen[worst]:
                raise NoConvergence(
                    f"quadrature stalled at relative error {rel:.3e} > {rel_tol:.3e} "
                    f"with all panels at minimal width"
                )
            split[worst] = True
        # respect the remaining evaluation budget
        budget = (max_evals - evaluations) // 30
        if budget < np.count_nonzero(split):
            order = np.argsort(log_errs)[::-1]
            keep = order[np.isin(order, np.flatnonzero(split))][: max(budget, 1)]
            split = np.zeros_like(split)
            split[keep] = True
        mids = 0.5 * (los + his)
        too_narrow = (his - los) <= 8.0 * np.finfo(float).eps * np.maximum(1.0, np.abs(mids))
        frozen |= split & too_narrow
        split &= ~too_narrow
        if not np.any(split):
            continue
        mids = mids[split]
        child_lo = np.concatenate([los[split], mids])
        child_hi = np.concatenate([mids, his[split]])
        child_int, child_err = _eval_panels(log_f, child_lo, child_hi)
        evaluations += 15 * child_lo.size
        keep_mask = ~split
        los = np.concatenate([los[keep_mask], child_lo])
        his = np.concatenate([his[keep_mask], child_hi])
        log_ints = np.concatenate([log_ints[keep_mask], child_int])
        log_errs = np.concatenate([log_errs[keep_mask], child_err])
        frozen = np.concatenate([frozen[keep_mask], np.zeros(child_lo.size, dtype=bool)])

    log_total = _logsumexp(log_ints)
    rel = math.exp(min(_logsumexp(log_errs) - log_total, 700.0))
    if rel <= rel_tol:
        return LogIntegralResult(log_total, rel, evaluations, los.size)
    raise NoConvergence(
        f"quadrature used {evaluations} evaluations without reaching relative "
        f"tolerance {rel_tol:.3e} (best {rel:.3e})"
    )
