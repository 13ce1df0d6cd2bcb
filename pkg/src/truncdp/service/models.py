"""Request/response models for the accounting service.

These are deliberately thin: validation of the *numerics* (positivity,
interval ordering, degenerate masses) lives in the core library and surfaces
as 400 responses; pydantic only enforces shape and types here.
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field

from truncdp.accountant import GaussianParams, LaplaceParams
from truncdp.distributions import Interval
from truncdp.errors import InvalidParams


class IntervalModel(BaseModel):
    a: float
    b: float

    def to_interval(self) -> Interval:
        return Interval(self.a, self.b)


class MechanismSpec(BaseModel):
    """Mechanism + parameters, shared by several endpoints."""

    model_config = ConfigDict(populate_by_name=True)

    mechanism: Literal["gaussian", "laplace"]
    sensitivity: float
    sigma: Optional[float] = None
    lam: Optional[float] = Field(default=None, alias="lambda")
    interval: IntervalModel

    def to_params(self):
        iv = self.interval.to_interval()
        if self.mechanism == "gaussian":
            if self.sigma is None:
                raise InvalidParams("gaussian mechanism requires sigma")
            return GaussianParams(self.sensitivity, self.sigma, iv)
        if self.lam is None:
            raise InvalidParams("laplace mechanism requires lambda")
        return LaplaceParams(self.sensitivity, self.lam, iv)

    def noise_parameter(self) -> float:
        return self.sigma if self.mechanism == "gaussian" else self.lam


class RdpRequest(MechanismSpec):
    alpha_grid: Optional[list[float]] = None
    delta: Optional[float] = None
    direction: Literal["forward", "reverse", "symmetric-max"] = "symmetric-max"


class RdpReport(BaseModel):
    """The accountant report shape; also what `rdp --json` prints."""

    mechanism: Optional[str]
    params: Optional[dict]
    alpha_grid: list[float]
    rdp: list[float]
    case_tags: Optional[list[str]]
    epsilon: Optional[float]
    delta: Optional[float]
    realized_alpha: Optional[float]


class CurvePayload(BaseModel):
    alpha_grid: list[float]
    rdp: list[float]


class ConvertRequest(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    delta: float
    curve: Optional[CurvePayload] = None
    mechanism: Optional[Literal["gaussian", "laplace"]] = None
    sensitivity: Optional[float] = None
    sigma: Optional[float] = None
    lam: Optional[float] = Field(default=None, alias="lambda")
    interval: Optional[IntervalModel] = None
    alpha_grid: Optional[list[float]] = None


class SampleRequest(MechanismSpec):
    value: float
    n: int = 1
    seed: Optional[int] = None
    method: Literal["inverse-cdf", "rejection"] = "inverse-cdf"
    max_attempts: int = 1_000_000
    ledger_path: Optional[str] = None


class LedgerInfo(BaseModel):
    path: str
    entries: int
    alpha_grid: list[float]
    composed_rdp: list[float]


class SampleResponse(BaseModel):
    mechanism: str
    values: list[float]
    attempts: list[int]
    seed: int
    ledger: Optional[LedgerInfo] = None


class ValidateRequest(BaseModel):
    suite: Literal["gaussian-ab", "jensen", "slope", "case3", "closed-form-vs-oracle", "all"]
    grid_seed: int = 0


class ValidateResponse(BaseModel):
    passed: bool
    reports: list[dict]


class CalibrateRequest(BaseModel):
    mechanism: Literal["gaussian", "laplace"]
    epsilon: float
    delta: float
    steps: int = 1
    sensitivity: float
    interval: IntervalModel
    alphas: Optional[list[float]] = None


class CalibrateResponse(BaseModel):
    parameter: str
    value: float
    achieved_epsilon: float
    free: bool
    iterations: int


class SweepSpec(BaseModel):
    parameter: Literal["sigma", "lambda", "interval"]
    start: float
    stop: float
    step: float


class CurveRequest(MechanismSpec):
    delta: float
    sweep: SweepSpec


class CurveResponse(BaseModel):
    columns: list[str]
    rows: list[list[float]]
