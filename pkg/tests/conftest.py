"""Shared test configuration.

Hypothesis is run derandomized so every CI run exercises the identical case
list; the numeric comparisons against mpmath make flaky-by-tolerance cases a
real hazard otherwise. deadline is disabled because individual draws may hit
the adaptive integrator.
"""

import pathlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "numeric",
    deadline=None,
    derandomize=True,
    max_examples=75,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("numeric")

SCHEMA_DIR = pathlib.Path(__file__).resolve().parent.parent / "docs" / "schemas"


@pytest.fixture()
def runner():
    from click.testing import CliRunner

    return CliRunner()


@pytest.fixture()
def client():
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from truncdp.service.app import create_app

    return TestClient(create_app())


@pytest.fixture
def load_schema():
    """Callable fixture: load one of the shipped JSON schemas by file name."""
    import json

    def _load(name: str) -> dict:
        return json.loads((SCHEMA_DIR / name).read_text())

    return _load
