"""FastAPI wrapper around the core package.

The CLI drives this app in-process by default (no socket involved); it can
also be served with uvicorn for remote use:

    uvicorn truncdp.service.app:app

Domain errors map to HTTP statuses: InvalidParams/DegenerateMass and friends
become 400, a rejection sampler giving up becomes 409, and shape errors are
pydantic's usual 422.
"""

from __future__ import annotations

import secrets

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

import truncdp
from truncdp import accountant, calibrate, mechanisms, oracle
from truncdp.accountant import RdpCurve, best_epsilon
from truncdp.errors import AttemptsExceeded, InvalidParams, TruncDpError
from truncdp.ledger import PrivacyLedger
from truncdp.service import models


def _curve_for(params_spec: models.MechanismSpec, alphas, direction="symmetric-max"):
    params = params_spec.to_params()
    if params_spec.mechanism == "gaussian":
        return accountant.gaussian_rdp_curve(params, alphas, direction)
    return accountant.laplace_rdp_curve(params, alphas)


def _params_dict(spec: models.MechanismSpec) -> dict:
    d = {
        "sensitivity": spec.sensitivity,
        "a": spec.interval.a,
        "b": spec.interval.b,
    }
    if spec.mechanism == "gaussian":
        d["sigma"] = spec.sigma
    else:
        d["lambda"] = spec.lam
    return d


def create_app() -> FastAPI:
    app = FastAPI(title="truncdp", version=truncdp.__version__)

    @app.exception_handler(AttemptsExceeded)
    async def _attempts_handler(request: Request, exc: AttemptsExceeded):
        return JSONResponse(status_code=409, content={"error": "AttemptsExceeded", "detail": str(exc)})

    @app.exception_handler(TruncDpError)
    async def _domain_handler(request: Request, exc: TruncDpError):
        return JSONResponse(status_code=400, content={"error": type(exc).__name__, "detail": str(exc)})

    @app.get("/health")
    def health():
        return {"status": "ok", "version": truncdp.__version__}

    @app.post("/rdp", response_model=models.RdpReport)
    def rdp(req: models.RdpRequest):
        curve, tags = _curve_for(req, req.alpha_grid, req.direction)
        epsilon = delta = realized = None
        if req.delta is not None:
            guarantee = best_epsilon(curve, req.delta)
            epsilon, delta, realized = guarantee.epsilon, guarantee.delta, guarantee.realized_alpha
        return models.RdpReport(
            mechanism=req.mechanism,
            params=_params_dict(req),
            alpha_grid=list(curve.alphas),
            rdp=list(curve.values),
            case_tags=list(tags),
            epsilon=epsilon,
            delta=delta,
            realized_alpha=realized,
        )

    @app.post("/convert", response_model=models.RdpReport)
    def convert(req: models.ConvertRequest):
        if (req.curve is None) == (req.mechanism is None):
            raise InvalidParams("provide exactly one of: a curve, or mechanism parameters")
        if req.curve is not None:
            curve = RdpCurve.from_points(zip(req.curve.alpha_grid, req.curve.rdp))
            mechanism = params = tags = None
        else:
            if req.sensitivity is None or req.interval is None:
                raise InvalidParams("mechanism conversion requires sensitivity and interval")
            spec = models.MechanismSpec(
                mechanism=req.mechanism,
                sensitivity=req.sensitivity,
                sigma=req.sigma,
                lam=req.lam,
                interval=req.interval,
            )
            curve, tags_tuple = _curve_for(spec, req.alpha_grid)
            mechanism, params, tags = req.mechanism, _params_dict(spec), list(tags_tuple)
        guarantee = best_epsilon(curve, req.delta)
        return models.RdpReport(
            mechanism=mechanism,
            params=params,
            alpha_grid=list(curve.alphas),
            rdp=list(curve.values),
            case_tags=tags,
            epsilon=guarantee.epsilon,
            delta=guarantee.delta,
            realized_alpha=guarantee.realized_alpha,
        )

    @app.post("/sample", response_model=models.SampleResponse)
    def sample(req: models.SampleRequest):
        seed = req.seed if req.seed is not None else secrets.randbits(63)
        rng = np.random.default_rng(seed)
        params = req.to_params()
        if req.mechanism == "gaussian":
            values, attempts = mechanisms.gaussian_release_many(
                req.value, params, rng, req.n, req.method, req.max_attempts
            )
        else:
            values, attempts = mechanisms.laplace_release_many(
                req.value, params, rng, req.n, req.method, req.max_attempts
            )
        ledger_info = None
        if req.ledger_path:
            ledger = PrivacyLedger(req.ledger_path)
            composed = ledger.append_releases(req.mechanism, params, req.n)
            ledger_info = models.LedgerInfo(
                path=str(ledger.path),
                entries=len(ledger.entries),
                alpha_grid=list(composed.alphas),
                composed_rdp=list(composed.values),
            )
        return models.SampleResponse(
            mechanism=req.mechanism,
            values=[float(v) for v in values],
            attempts=[int(k) for k in attempts],
            seed=seed,
            ledger=ledger_info,
        )

    @app.post("/validate", response_model=models.ValidateResponse)
    def validate(req: models.ValidateRequest):
        reports = oracle.run_suite(req.suite, req.grid_seed)
        return models.ValidateResponse(
            passed=all(r.passed for r in reports),
            reports=[r.to_dict() for r in reports],
        )

    @app.post("/calibrate", response_model=models.CalibrateResponse)
    def run_calibration(req: models.CalibrateRequest):
        target = calibrate.CalibrationTarget(
            epsilon=req.epsilon,
            delta=req.delta,
            steps=req.steps,
            mechanism=req.mechanism,
            sensitivity=req.sensitivity,
            interval=req.interval.to_interval(),
        )
        if req.mechanism == "gaussian":
            result = calibrate.calibrate_sigma(target, req.alphas)
        else:
            result = calibrate.calibrate_lambda(target, req.alphas)
        return models.CalibrateResponse(
            parameter=result.parameter,
            value=result.value,
            achieved_epsilon=result.achieved_epsilon,
            free=result.free,
            iterations=result.iterations,
        )

    @app.post("/curve", response_model=models.CurveResponse)
    def curve_sweep(req: models.CurveRequest):
        rows = []
        for x in _sweep_values(req.sweep):
            spec = _spec_at(req, x)
            params = spec.to_params()
            if req.mechanism == "gaussian":
                curve, _ = accountant.gaussian_rdp_curve(params, None)
                untrunc = [
                    accountant.gaussian_rdp_untruncated(al, spec.sigma) for al in curve.alphas
                ]
            else:
                curve, _ = accountant.laplace_rdp_curve(params, None)
                untrunc = [
                    accountant.laplace_rdp_untruncated(al, spec.sensitivity, spec.lam)
                    for al in curve.alphas
                ]
            eps = best_epsilon(curve, req.delta).epsilon
            for al, rdp_t, rdp_u in zip(curve.alphas, curve.values, untrunc):
                rows.append([al, x, rdp_t, rdp_u, eps])
        return models.CurveResponse(
            columns=["alpha", "parameter", "rdp_truncated", "rdp_untruncated", "epsilon_at_delta"],
            rows=rows,
        )

    @app.get("/ledger")
    def read_ledger(path: str):
        return PrivacyLedger(path).to_dict()

    return app


def _sweep_values(sweep: models.SweepSpec) -> list[float]:
    if sweep.step <= 0.0 or sweep.stop < sweep.start:
        raise InvalidParams(f"bad sweep range {sweep.start}:{sweep.stop}:{sweep.step}")
    values = []
    x = sweep.start
    while x <= sweep.stop * (1.0 + 1e-12):
        values.append(round(x, 12))
        x += sweep.step
    if not values:
        raise InvalidParams("sweep produced no values")
    return values


def _spec_at(req: models.CurveRequest, x: float) -> models.MechanismSpec:
    """Materialize the mechanism spec at one sweep position."""
    if req.sweep.parameter == "interval":
        center = 0.5 * (req.interval.a + req.interval.b)
        interval = models.IntervalModel(a=center - x, b=center + x)
        sigma, lam = req.sigma, req.lam
    else:
        interval = req.interval
        sigma = x if req.sweep.parameter == "sigma" else req.sigma
        lam = x if req.sweep.parameter == "lambda" else req.lam
    if req.sweep.parameter == "sigma" and req.mechanism != "gaussian":
        raise InvalidParams("sigma sweep requires the gaussian mechanism")
    if req.sweep.parameter == "lambda" and req.mechanism != "laplace":
        raise InvalidParams("lambda sweep requires the laplace mechanism")
    return models.MechanismSpec(
        mechanism=req.mechanism,
        sensitivity=req.sensitivity,
        sigma=sigma,
        lam=lam,
        interval=interval,
    )


app = create_app()
