"""Command-line surface: budget computation, conversion, release, validation.

The CLI is a thin client of the HTTP service. By default it instantiates the
service app in-process (no network, no separate daemon needed); point it at a
running instance with --server or the TRUNCDP_SERVER environment variable.

Exit codes (stable contract):
    0  success
    2  invalid input (bad flags, bad parameters, malformed files)
    3  mechanism failure (rejection sampler exhausted its attempt budget)
    4  validation failure (a property suite reported violations)
"""

from __future__ import annotations

import csv
import io
import json
import os
import sys

import click

from truncdp.ledger import LEDGER_ENV_VAR

SERVER_ENV_VAR = "TRUNCDP_SERVER"

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_MECHANISM = 3
EXIT_VALIDATION = 4


class _InProcessClient:
    """Drives the service app directly; created lazily so `--help` stays fast."""

    def __init__(self):
        import warnings

        with warnings.catch_warnings():
            # the ASGI test client drags in framework deprecation chatter;
            # keep it off the CLI's stderr
            warnings.simplefilter("ignore")
            from fastapi.testclient import TestClient

            from truncdp.service.app import create_app

            self._client = TestClient(create_app())

    def post(self, path, payload):
        return self._client.post(path, json=payload)


class _RemoteClient:
    def __init__(self, base_url: str):
        import httpx

        self._errors = httpx.HTTPError
        self._client = httpx.Client(base_url=base_url, timeout=600.0)

    def post(self, path, payload):
        try:
            return self._client.post(path, json=payload)
        except self._errors as exc:
            raise click.UsageError(f"cannot reach server: {exc}")


def _client(ctx) -> object:
    if ctx.obj.get("client") is None:
        server = ctx.obj.get("server")
        ctx.obj["client"] = _RemoteClient(server) if server else _InProcessClient()
    return ctx.obj["client"]


def _post(ctx, path: str, payload: dict) -> dict:
    resp = _client(ctx).post(path, payload)
    if resp.status_code == 200:
        return resp.json()
    try:
        body = resp.json()
    except ValueError:
        body = {"detail": resp.text}
    detail = body.get("detail", body)
    if isinstance(detail, list):  # pydantic 422: name the offending fields
        parts = []
        for item in detail:
            loc = ".".join(str(p) for p in item.get("loc", []) if p != "body")
            parts.append(f"{loc}: {item.get('msg', '')}")
        detail = "; ".join(parts)
    click.echo(f"error: {detail}", err=True)
    ctx.exit(EXIT_MECHANISM if resp.status_code == 409 else EXIT_INVALID)


def _fmt(x: float) -> str:
    return f"{x:.12g}"


@click.group()
@click.option(
    "--server",
    envvar=SERVER_ENV_VAR,
    default=None,
    metavar="URL",
    help="Base URL of a running service; default runs the service in-process.",
)
@click.pass_context
def cli(ctx, server):
    """Truncated-release differential-privacy accounting."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


def _mechanism_options(fn):
    fn = click.option("--b", "b", type=float, required=True, help="Upper truncation bound.")(fn)
    fn = click.option("--a", "a", type=float, required=True, help="Lower truncation bound.")(fn)
    fn = click.option("--lambda", "lam", type=float, default=None, help="Laplace noise scale.")(fn)
    fn = click.option("--sigma", type=float, default=None, help="Gaussian noise multiplier.")(fn)
    fn = click.option("--sensitivity", type=float, required=True, help="Query sensitivity (clipping ceiling).")(fn)
    fn = click.option(
        "--mechanism", type=click.Choice(["gaussian", "laplace"]), required=True
    )(fn)
    return fn


def _mechanism_payload(mechanism, sensitivity, sigma, lam, a, b) -> dict:
    return {
        "mechanism": mechanism,
        "sensitivity": sensitivity,
        "sigma": sigma,
        "lambda": lam,
        "interval": {"a": a, "b": b},
    }


def _parse_alpha_grid(text):
    if text is None:
        return None
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError as exc:
        raise click.UsageError(f"bad --alpha-grid: {exc}")


@cli.command("rdp")
@_mechanism_options
@click.option("--alpha-grid", default=None, metavar="A1,A2,...", help="Comma-separated Renyi orders.")
@click.option("--delta", type=float, default=None, help="Also convert to epsilon at this delta.")
@click.option("--json", "as_json", is_flag=True, help="Emit the JSON report.")
@click.pass_context
def cmd_rdp(ctx, mechanism, sensitivity, sigma, lam, a, b, alpha_grid, delta, as_json):
    """Print the truncated-release RDP curve with case tags and bound column."""
    payload = _mechanism_payload(mechanism, sensitivity, sigma, lam, a, b)
    payload["alpha_grid"] = _parse_alpha_grid(alpha_grid)
    payload["delta"] = delta
    report = _post(ctx, "/rdp", payload)
    if as_json:
        click.echo(json.dumps(report, indent=2))
        return
    click.echo(f"{'alpha':>10}  {'rdp':>18}  {'bound':>18}  case")
    for alpha, rdp, tag in zip(report["alpha_grid"], report["rdp"], report["case_tags"]):
        bound = _untruncated_bound(mechanism, alpha, sensitivity, sigma, lam)
        click.echo(f"{_fmt(alpha):>10}  {_fmt(rdp):>18}  {_fmt(bound):>18}  {tag}")
    if report.get("epsilon") is not None:
        click.echo(
            f"epsilon = {_fmt(report['epsilon'])} at delta = {_fmt(report['delta'])} "
            f"(alpha = {_fmt(report['realized_alpha'])})"
        )


def _untruncated_bound(mechanism, alpha, sensitivity, sigma, lam) -> float:
    from truncdp import accountant

    if mechanism == "gaussian":
        return accountant.gaussian_rdp_untruncated(alpha, sigma)
    return accountant.laplace_rdp_untruncated(alpha, sensitivity, lam)


@cli.command("convert")
@click.option("--delta", type=float, required=True)
@click.option("--mechanism", type=click.Choice(["gaussian", "laplace"]), default=None)
@click.option("--sensitivity", type=float, default=None)
@click.option("--sigma", type=float, default=None)
@click.option("--lambda", "lam", type=float, default=None)
@click.option("--a", "a", type=float, default=None)
@click.option("--b", "b", type=float, default=None)
@click.option("--alpha-grid", default=None, metavar="A1,A2,...")
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def cmd_convert(ctx, delta, mechanism, sensitivity, sigma, lam, a, b, alpha_grid, as_json):
    """Convert RDP to (epsilon, delta): from mechanism flags, or a curve JSON on stdin.

    The stdin form accepts either {"alpha_grid": [...], "rdp": [...]} or a
    full report as printed by `rdp --json`.
    """
    payload = {"delta": delta}
    if mechanism is not None:
        payload.update(
            mechanism=mechanism,
            sensitivity=sensitivity,
            sigma=sigma,
            interval={"a": a, "b": b} if a is not None and b is not None else None,
            alpha_grid=_parse_alpha_grid(alpha_grid),
        )
        payload["lambda"] = lam
    else:
        text = sys.stdin.read()
        try:
            doc = json.loads(text)
            payload["curve"] = {"alpha_grid": doc["alpha_grid"], "rdp": doc["rdp"]}
        except (ValueError, KeyError, TypeError):
            click.echo("error: expected a curve JSON with alpha_grid and rdp on stdin", err=True)
            ctx.exit(EXIT_INVALID)
    report = _post(ctx, "/convert", payload)
    if as_json:
        click.echo(json.dumps(report, indent=2))
        return
    click.echo(
        f"epsilon = {_fmt(report['epsilon'])}  delta = {_fmt(report['delta'])}  "
        f"alpha = {_fmt(report['realized_alpha'])}"
    )


@cli.command("sample")
@_mechanism_options
@click.option("--value", type=float, required=True, help="The query output to release.")
@click.option("--n", type=int, default=1, show_default=True, help="Number of releases.")
@click.option("--seed", type=int, default=None, help="RNG seed; generated and reported if omitted.")
@click.option(
    "--method",
    type=click.Choice(["inverse-cdf", "rejection"]),
    default="inverse-cdf",
    show_default=True,
)
@click.option("--max-attempts", type=int, default=1_000_000, show_default=True)
@click.option(
    "--ledger",
    "ledger_path",
    default=None,
    metavar="PATH",
    help=f"Append releases to this privacy ledger (default: ${LEDGER_ENV_VAR}).",
)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def cmd_sample(ctx, mechanism, sensitivity, sigma, lam, a, b, value, n, seed, method, max_attempts, ledger_path, as_json):
    """Release noisy values (one per line) via selective release."""
    if ledger_path is None:
        ledger_path = os.environ.get(LEDGER_ENV_VAR) or None
    payload = _mechanism_payload(mechanism, sensitivity, sigma, lam, a, b)
    payload.update(
        value=value, n=n, seed=seed, method=method,
        max_attempts=max_attempts, ledger_path=ledger_path,
    )
    result = _post(ctx, "/sample", payload)
    if seed is None:
        click.echo(f"seed: {result['seed']}", err=True)
    if as_json:
        click.echo(json.dumps(result, indent=2))
        return
    for v in result["values"]:
        click.echo(f"{v:.17g}")
    if result.get("ledger"):
        info = result["ledger"]
        click.echo(f"ledger: {info['path']} now holds {info['entries']} releases", err=True)


@cli.command("validate")
@click.option(
    "--suite",
    type=click.Choice(["gaussian-ab", "jensen", "slope", "case3", "closed-form-vs-oracle", "all"]),
    required=True,
)
@click.option("--grid-seed", type=int, default=0, show_default=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def cmd_validate(ctx, suite, grid_seed, as_json):
    """Run the numerical property suites; exit 4 on any violation."""
    result = _post(ctx, "/validate", {"suite": suite, "grid_seed": grid_seed})
    if as_json:
        click.echo(json.dumps(result, indent=2))
    else:
        for report in result["reports"]:
            status = "ok" if report["passed"] else f"FAIL ({report['violation_count']} violations)"
            click.echo(
                f"{report['property']:<28} grid={report['grid_size']:<6} "
                f"max_slack={report['max_slack']:.6e}  {status}"
            )
            for v in report["violations"][:5]:
                click.echo(f"    worst: lhs={v['lhs']:.12g} rhs={v['rhs']:.12g} at {v['params']}")
    if not result["passed"]:
        ctx.exit(EXIT_VALIDATION)


@cli.command("calibrate")
@click.option("--mechanism", type=click.Choice(["gaussian", "laplace"]), required=True)
@click.option("--epsilon", type=float, required=True)
@click.option("--delta", type=float, required=True)
@click.option("--steps", type=int, default=1, show_default=True, help="Composed releases.")
@click.option("--sensitivity", type=float, required=True)
@click.option("--a", "a", type=float, required=True)
@click.option("--b", "b", type=float, required=True)
@click.option("--json", "as_json", is_flag=True)
@click.pass_context
def cmd_calibrate(ctx, mechanism, epsilon, delta, steps, sensitivity, a, b, as_json):
    """Find the smallest noise parameter meeting the (epsilon, delta) target."""
    payload = {
        "mechanism": mechanism,
        "epsilon": epsilon,
        "delta": delta,
        "steps": steps,
        "sensitivity": sensitivity,
        "interval": {"a": a, "b": b},
    }
    result = _post(ctx, "/calibrate", payload)
    if as_json:
        click.echo(json.dumps(result, indent=2))
        return
    note = "  (free: this geometry costs zero RDP at any noise level)" if result["free"] else ""
    click.echo(
        f"{result['parameter']} = {_fmt(result['value'])}  "
        f"achieved epsilon = {_fmt(result['achieved_epsilon'])}{note}"
    )


@cli.command("curve")
@_mechanism_options
@click.option("--delta", type=float, required=True)
@click.option(
    "--sweep",
    required=True,
    metavar="PARAM=START:STOP:STEP",
    help="Sweep sigma, lambda, or interval (half-width around the midpoint of [a,b]).",
)
@click.option("--output", type=click.Path(dir_okay=False), default=None, help="Write CSV here instead of stdout.")
@click.option("--json", "as_json", is_flag=True, help="Emit {columns, rows} JSON instead of CSV.")
@click.pass_context
def cmd_curve(ctx, mechanism, sensitivity, sigma, lam, a, b, delta, sweep, output, as_json):
    """Export (alpha, parameter, rdp_truncated, rdp_untruncated, epsilon_at_delta) CSV."""
    try:
        name, _, rest = sweep.partition("=")
        start, stop, step = (float(tok) for tok in rest.split(":"))
    except ValueError:
        click.echo(f"error: malformed --sweep {sweep!r}; expected PARAM=START:STOP:STEP", err=True)
        ctx.exit(EXIT_INVALID)
    if name not in ("sigma", "lambda", "interval"):
        click.echo(f"error: unknown sweep parameter {name!r}", err=True)
        ctx.exit(EXIT_INVALID)
    payload = _mechanism_payload(mechanism, sensitivity, sigma, lam, a, b)
    payload.update(delta=delta, sweep={"parameter": name, "start": start, "stop": stop, "step": step})
    result = _post(ctx, "/curve", payload)
    if as_json:
        click.echo(json.dumps(result, indent=2))
        return
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(result["columns"])
    for row in result["rows"]:
        writer.writerow(f"{x:.17g}" for x in row)
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(buf.getvalue())
        click.echo(f"wrote {len(result['rows'])} rows to {output}", err=True)
    else:
        click.echo(buf.getvalue(), nl=False)


def main(argv=None) -> int:
    """Programmatic entry point returning the exit code."""
    try:
        cli.main(args=argv, standalone_mode=False)
    except SystemExit as exc:
        code = exc.code
        return int(code) if code is not None else 0
    except click.UsageError as exc:
        if exc.__class__.__name__ == "NoArgsIsHelpError":
            click.echo(exc.format_message())
            return EXIT_OK
        click.echo(f"error: {exc.format_message()}", err=True)
        return EXIT_INVALID
    except click.ClickException as exc:
        exc.show()
        return EXIT_INVALID
    except click.exceptions.Abort:
        return EXIT_INVALID
    return EXIT_OK


def entry() -> None:
    """Console-script entry point."""
    raise SystemExit(main())
