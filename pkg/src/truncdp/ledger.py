"""Persistent privacy ledger: every release appends its RDP curve to a file.

The ledger is a single versioned JSON document holding the alpha grid (fixed
at creation), one entry per release with the parameters and the RDP points
evaluated on that grid, and the running composed curve. Writes go through a
sidecar lock file plus write-to-temp / fsync / atomic-rename, so a crash at
any instant leaves either the old or the new document on disk, never a torn
one. On load the composed curve is recomputed from the entries and compared;
a mismatch means the file was edited or corrupted and is refused.
"""

from __future__ import annotations

import contextlib
import fcntl
import json
import math
import os
import tempfile
from datetime import datetime, timezone
from pathlib import Path

from truncdp import accountant
from truncdp.accountant import GaussianParams, LaplaceParams, RdpCurve
from truncdp.distributions import Interval
from truncdp.errors import InvalidParams, MismatchedGrids

LEDGER_VERSION = 1

#: Environment variable consulted by the CLI for a default ledger path.
LEDGER_ENV_VAR = "TRUNCDP_LEDGER"


def _params_to_dict(mechanism: str, params) -> dict:
    d = {"sensitivity": params.sensitivity, "a": params.interval.a, "b": params.interval.b}
    if mechanism == "gaussian":
        d["noise_multiplier"] = params.noise_multiplier
    else:
        d["scale"] = params.scale
    return d


def _params_from_dict(mechanism: str, d: dict):
    iv = Interval(float(d["a"]), float(d["b"]))
    if mechanism == "gaussian":
        return GaussianParams(float(d["sensitivity"]), float(d["noise_multiplier"]), iv)
    if mechanism == "laplace":
        return LaplaceParams(float(d["sensitivity"]), float(d["scale"]), iv)
    raise InvalidParams(f"unknown mechanism {mechanism!r} in ledger")


@contextlib.contextmanager
def _exclusive_lock(path: Path):
    lock_path = path.with_name(path.name + ".lock")
    fd = os.open(lock_path, os.O_CREAT | os.O_RDWR, 0o644)
    try:
        fcntl.flock(fd, fcntl.LOCK_EX)
        yield
    finally:
        fcntl.flock(fd, fcntl.LOCK_UN)
        os.close(fd)


class PrivacyLedger:
    """Append-only record of releases with a running composed RDP curve."""

    def __init__(self, path, alpha_grid=None):
        self.path = Path(path)
        requested = None if alpha_grid is None else tuple(sorted({float(a) for a in alpha_grid}))
        if self.path.exists():
            self._load()
            if requested is not None and requested != self.alpha_grid:
                raise MismatchedGrids(
                    f"ledger {self.path} was created with a different alpha grid; "
                    f"the grid is fixed at creation"
                )
        else:
            self.alpha_grid = requested if requested is not None else accountant.DEFAULT_ALPHA_GRID
            self.entries = []

    def _load(self):
        try:
            doc = json.loads(self.path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InvalidParams(f"cannot read ledger {self.path}: {exc}") from exc
        if not isinstance(doc, dict) or doc.get("version") != LEDGER_VERSION:
            raise InvalidParams(
                f"ledger {self.path} has unsupported version {doc.get('version')!r} "
                f"(expected {LEDGER_VERSION})"
            )
        try:
            self.alpha_grid = tuple(float(a) for a in doc["alpha_grid"])
            self.entries = list(doc["entries"])
            stored = [float(v) for v in doc["composed"]["rdp"]]
            for e in self.entries:
                if len(e["rdp_points"]) != len(self.alpha_grid):
                    raise InvalidParams(f"ledger {self.path}: entry grid length mismatch")
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParams(f"ledger {self.path} is malformed: {exc}") from exc
        recomputed = self._composed_values()
        if len(stored) != len(recomputed) or any(
            not math.isclose(s, r, rel_tol=1e-9, abs_tol=1e-12) for s, r in zip(stored, recomputed)
        ):
            raise InvalidParams(
                f"ledger {self.path}: stored composed curve does not match its entries "
                f"(file edited or corrupted)"
            )

    def _composed_values(self) -> list[float]:
        total = [0.0] * len(self.alpha_grid)
        for e in self.entries:
            for i, v in enumerate(e["rdp_points"]):
                total[i] += float(v)
        return total

    def composed_curve(self) -> RdpCurve:
        return RdpCurve(self.alpha_grid, tuple(self._composed_values()))

    def append_releases(self, mechanism: str, params, count: int = 1) -> RdpCurve:
        """Record `count` releases with the same parameters; returns the new composed curve.

        The entry's RDP points are always evaluated on the ledger's own grid,
        whatever grid the caller uses elsewhere.
        """
        if count < 1:
            raise InvalidParams(f"count must be >= 1, got {count}")
        if mechanism == "gaussian":
            curve, _ = accountant.gaussian_rdp_curve(params, self.alpha_grid)
        elif mechanism == "laplace":
            curve, _ = accountant.laplace_rdp_curve(params, self.alpha_grid)
        else:
            raise InvalidParams(f"unknown mechanism {mechanism!r}")
        now = datetime.now(timezone.utc).isoformat()
        for _ in range(count):
            self.entries.append(
                {
                    "timestamp": now,
                    "mechanism": mechanism,
                    "params": _params_to_dict(mechanism, params),
                    "rdp_points": list(curve.values),
                }
            )
        self.save()
        return self.composed_curve()

    def append_release(self, mechanism: str, params) -> RdpCurve:
        return self.append_releases(mechanism, params, 1)

    def to_dict(self) -> dict:
        composed = self.composed_curve()
        return {
            "version": LEDGER_VERSION,
            "alpha_grid": list(self.alpha_grid),
            "entries": self.entries,
            "composed": {"alphas": list(composed.alphas), "rdp": list(composed.values)},
        }

    def save(self) -> None:
        """Atomically rewrite the ledger file (lock, temp file, fsync, rename)."""
        payload = json.dumps(self.to_dict(), indent=2)
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with _exclusive_lock(self.path):
            fd, tmp_name = tempfile.mkstemp(dir=self.path.parent, prefix=self.path.name + ".tmp")
            try:
                with os.fdopen(fd, "w") as fh:
                    fh.write(payload)
                    fh.flush()
                    os.fsync(fh.fileno())
                os.replace(tmp_name, self.path)
            except BaseException:
                with contextlib.suppress(OSError):
                    os.unlink(tmp_name)
                raise
            dir_fd = os.open(self.path.parent, os.O_RDONLY)
            try:
                os.fsync(dir_fd)
            finally:
                os.close(dir_fd)
