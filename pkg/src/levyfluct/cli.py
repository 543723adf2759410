"""Command-line harness.

Subcommands: ``exponent``, ``phi-inverse``, ``scale``, ``transform
{upper|lower|exit|exponent|rate}``, ``simulate`` and ``validate``.  Exit
codes: 0 success, 1 validation failure (some |z| > 3), 2 usage or
configuration error.
"""

from __future__ import annotations

import json
import math
import os
import sys
from dataclasses import dataclass, field

import click

from .errors import (
    ConfigError,
    FactorizationFailure,
    InvalidValueError,
    LevyFluctError,
    ParseError,
    UnknownKeyError,
)
from .identities import (
    TransformQuery,
    first_jump_transform,
    inverse_local_time_exponent,
    local_time_jump_rate,
    lower_passage_transform,
    minimum_transform,
    two_sided_exit,
    upper_passage_transform,
)
from .model import (
    ProcessSpec,
    right_inverse,
    spec_from_json,
    spec_to_json,
    tilt,
)
from .scale import Backend, ScaleEvaluator, make_evaluator, scale_table_rows
from .simulate import (
    StopRule,
    estimate_first_jump_transform,
    estimate_inverse_local_time_process,
    estimate_minimum_transform,
    estimate_passage_functional,
    estimate_two_sided_exit,
    simulate_euler,
    simulate_event_exact,
)

__all__ = [
    "RunConfig",
    "ValidationReport",
    "ReportRow",
    "parse_config",
    "emit_report",
    "run_command",
    "main",
]

_REPORT_HEADER = "identity,q,alpha,theta,x0,b,analytic,mc_mean,mc_se,z,pass"

# Stream offsets spaced so per-row path indices never collide.
_ROW_STRIDE = 1 << 40


def _fmt(v: float) -> str:
    """Fixed 17-significant-digit decimal formatting (round-trips float64)."""
    return f"{v:.16e}"


@dataclass
class RunConfig:
    """Process specification plus the free command parameters."""

    process: ProcessSpec
    params: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"process": spec_to_json(self.process), "params": dict(self.params)}


def parse_config(source: str | dict) -> RunConfig:
    """Parse a configuration from a file path, JSON text or a dict.

    Accepts either a bare process-specification object or
    {"process": {...}, "params": {...}}.  Unknown keys are rejected.
    """
    if isinstance(source, dict):
        obj = source
    else:
        text = source
        if os.path.exists(source):
            try:
                with open(source, "r", encoding="utf-8") as fh:
                    text = fh.read()
            except OSError as exc:
                raise ConfigError(f"cannot read config {source!r}: {exc}") from exc
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON config: {exc}") from exc
    if not isinstance(obj, dict):
        raise ParseError("config must be a JSON object")
    if "process" in obj:
        unknown = set(obj) - {"process", "params"}
        if unknown:
            raise UnknownKeyError(f"unknown key {sorted(unknown)[0]!r} in config")
        params = obj.get("params", {})
        if not isinstance(params, dict):
            raise InvalidValueError("'params' must be an object")
        for key, value in params.items():
            if not isinstance(value, (int, float, str)) or isinstance(value, bool):
                raise InvalidValueError(f"param {key!r} must be a number or string")
        return RunConfig(process=spec_from_json(obj["process"]), params=dict(params))
    return RunConfig(process=spec_from_json(obj))


@dataclass(frozen=True)
class ReportRow:
    identity: str
    q: float
    alpha: float
    theta: float
    x0: float
    b: float
    analytic: float
    mc_mean: float
    mc_se: float

    @property
    def z(self) -> float:
        if self.mc_se == 0.0:
            return 0.0 if self.mc_mean == self.analytic else math.inf
        return (self.mc_mean - self.analytic) / self.mc_se

    @property
    def passed(self) -> bool:
        return abs(self.z) <= 3.0


@dataclass
class ValidationReport:
    rows: list[ReportRow] = field(default_factory=list)

    @property
    def all_passed(self) -> bool:
        return all(row.passed for row in self.rows)


def emit_report(report: ValidationReport, path: str) -> None:
    """Write the report CSV (17-significant-digit decimals, deterministic
    row order)."""
    lines = [_REPORT_HEADER]
    for r in report.rows:
        lines.append(
            ",".join(
                [
                    r.identity,
                    _fmt(r.q),
                    _fmt(r.alpha),
                    _fmt(r.theta),
                    _fmt(r.x0),
                    _fmt(r.b),
                    _fmt(r.analytic),
                    _fmt(r.mc_mean),
                    _fmt(r.mc_se),
                    _fmt(r.z),
                    "true" if r.passed else "false",
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _evaluator(spec: ProcessSpec, q: float, backend: str) -> ScaleEvaluator:
    if backend == "auto":
        try:
            return make_evaluator(spec, q, Backend.CLOSED_FORM)
        except FactorizationFailure:
            return make_evaluator(spec, q, Backend.NUMERIC_INVERSION)
    return make_evaluator(spec, q, backend)


# -- click wiring -------------------------------------------------------------


def _config_option(fn):
    return click.option(
        "--config", "config_path", required=True, metavar="FILE",
        help="Process specification JSON.",
    )(fn)


_backend_option = click.option(
    "--backend", type=click.Choice(["auto", "closed", "numeric"]),
    default="auto", show_default=True, help="Scale-function backend.",
)


@click.group()
def cli():
    """Fluctuation identities of reflected spectrally negative Levy
    processes, with Monte Carlo validation."""


@cli.command()
@_config_option
@click.option("--alpha", type=float, required=True)
@click.option("--q", type=float, default=None,
              help="Evaluate the exponent of the q-tilted process instead.")
def exponent(config_path, alpha, q):
    """Print the Laplace exponent phi(alpha) (or the tilted psi(alpha))."""
    spec = parse_config(config_path).process
    if q is None:
        if alpha < 0.0:
            raise ConfigError("alpha must be >= 0")
        click.echo(str(float(spec.exponent(alpha))))
    else:
        click.echo(str(float(tilt(spec, q).exponent(alpha))))


@cli.command("phi-inverse")
@_config_option
@click.option("--q", type=float, required=True)
def phi_inverse(config_path, q):
    """Print the right inverse Phi(q) of the Laplace exponent."""
    spec = parse_config(config_path).process
    click.echo(str(right_inverse(spec, q)))


@cli.command()
@_config_option
@click.option("--q", type=float, required=True)
@click.option("--alpha", type=float, required=True, help="Alpha for the z column.")
@click.option("--x-max", type=float, default=5.0, show_default=True)
@click.option("--points", type=int, default=101, show_default=True)
@_backend_option
@click.option("--out", "out_path", default=None, metavar="CSV",
              help="Write the table here instead of stdout.")
def scale(config_path, q, alpha, x_max, points, backend, out_path):
    """Sweep x -> (W_q, W_q', Z_q(alpha, .)) and emit a CSV table."""
    spec = parse_config(config_path).process
    ev = _evaluator(spec, q, backend)
    if points < 2 or x_max <= 0.0:
        raise ConfigError("need points >= 2 and x-max > 0")
    xs = [x_max * i / (points - 1) for i in range(points)]
    lines = ["x,w_q,w_q_prime,z_q_alpha"]
    for x, w, wp, z in scale_table_rows(ev, alpha, xs):
        lines.append(f"{_fmt(x)},{_fmt(w)},{_fmt(wp)},{_fmt(z)}")
    text = "\n".join(lines) + "\n"
    if out_path is None:
        click.echo(text, nl=False)
    else:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)


@cli.command()
@click.argument("which", type=click.Choice(["upper", "lower", "exit", "exponent", "rate"]))
@_config_option
@click.option("--q", type=float, default=0.0, show_default=True)
@click.option("--alpha", type=float, default=0.0, show_default=True)
@click.option("--theta", type=float, default=0.0, show_default=True)
@click.option("--x0", type=float, default=0.0, show_default=True)
@click.option("--b", type=float, required=True)
@_backend_option
@click.option("--components", is_flag=True, help="Also print the component breakdown.")
def transform(which, config_path, q, alpha, theta, x0, b, backend, components):
    """Evaluate one fluctuation identity and print its value."""
    spec = parse_config(config_path).process
    ev = _evaluator(spec, q, backend)
    if which in ("upper", "lower"):
        query = TransformQuery(q=q, alpha=alpha, theta=theta, x0=x0, b=b)
        res = (upper_passage_transform if which == "upper" else lower_passage_transform)(ev, query)
        click.echo(str(res.value))
        if components:
            click.echo(json.dumps(res.components, sort_keys=True))
    elif which == "exit":
        click.echo(str(two_sided_exit(ev, x0, b - x0)))
    elif which == "exponent":
        click.echo(str(inverse_local_time_exponent(ev, q, alpha, b)))
    else:
        click.echo(str(local_time_jump_rate(ev, b)))


@cli.command()
@_config_option
@click.option("--x0", type=float, required=True)
@click.option("--b", type=float, required=True)
@click.option("--stop", type=click.Choice(["upper", "lower", "time", "ulevel"]),
              default="upper", show_default=True)
@click.option("--t-max", type=float, default=None, help="Horizon for --stop time.")
@click.option("--u-max", type=float, default=None, help="Level for --stop ulevel.")
@click.option("--dt", type=float, default=None,
              help="Euler step; omit for event-exact (sigma^2 = 0 only).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--out", "out_path", default=None, metavar="CSV",
              help="Dump the path (t,x,w,l,u) here.")
def simulate(config_path, x0, b, stop, t_max, u_max, dt, seed, out_path):
    """Simulate one reflected path and print a summary or dump it."""
    spec = parse_config(config_path).process
    if stop == "time":
        if t_max is None:
            raise ConfigError("--stop time requires --t-max")
        rule = StopRule.time(t_max)
    elif stop == "ulevel":
        if u_max is None:
            raise ConfigError("--stop ulevel requires --u-max")
        rule = StopRule.u_level(u_max)
    elif stop == "upper":
        rule = StopRule.first_upper()
    else:
        rule = StopRule.first_lower()
    if dt is None and spec.gaussian_sq == 0.0:
        path = simulate_event_exact(spec, x0, b, rule, seed)
    else:
        if dt is None:
            raise ConfigError("a Gaussian component requires --dt")
        path = simulate_euler(spec, x0, b, dt, rule, seed)
    if out_path is not None:
        lines = ["t,x,w,l,u"]
        for i in range(len(path.times)):
            lines.append(
                f"{_fmt(path.times[i])},{_fmt(path.x[i])},{_fmt(path.w[i])},"
                f"{_fmt(path.l[i])},{_fmt(path.u[i])}"
            )
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write("\n".join(lines) + "\n")
    p = path.passage
    click.echo(
        f"events={len(path.times)} t={path.times[-1]!r} w={path.w[-1]!r} "
        f"l={path.l[-1]!r} u={path.u[-1]!r} tau_u0={p.tau_u0!r} "
        f"l_at_tau_u0={p.l_at_tau_u0!r} tau_l0={p.tau_l0!r} "
        f"l_at_tau_l0={p.l_at_tau_l0!r} u_at_tau_l0={p.u_at_tau_l0!r}"
    )


@cli.command()
@_config_option
@click.option("--suite", type=click.Choice(["default"]), default="default",
              show_default=True)
@click.option("--paths", type=int, default=100_000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--dt", type=float, default=None,
              help="Euler step for specs with a Gaussian component.")
@click.option("--q", type=float, default=0.1, show_default=True)
@click.option("--alpha", type=float, default=None,
              help="Transform argument; defaults to Phi(q) + 0.5.")
@click.option("--theta", type=float, default=0.3, show_default=True)
@click.option("--b", type=float, default=2.0, show_default=True)
@click.option("--x0", type=float, default=None, help="Defaults to b/2.")
@click.option("--out", "out_path", default=None, metavar="CSV")
def validate(config_path, suite, paths, seed, dt, q, alpha, theta, b, x0, out_path):
    """Check every applicable identity against Monte Carlo; exit 1 when any
    |z| exceeds 3."""
    spec = parse_config(config_path).process
    report = run_validation_suite(
        spec, paths=paths, seed=seed, dt=dt, q=q, alpha=alpha, theta=theta,
        b=b, x0=x0,
    )
    for row in report.rows:
        click.echo(
            f"{row.identity:24s} analytic={row.analytic: .6f} "
            f"mc={row.mc_mean: .6f} se={row.mc_se:.2e} z={row.z:+.2f} "
            f"{'pass' if row.passed else 'FAIL'}"
        )
    if out_path is not None:
        emit_report(report, out_path)
    if not report.all_passed:
        sys.exit(1)


def run_validation_suite(
    spec: ProcessSpec,
    paths: int = 100_000,
    seed: int = 0,
    dt: float | None = None,
    q: float = 0.1,
    alpha: float | None = None,
    theta: float = 0.3,
    b: float = 2.0,
    x0: float | None = None,
) -> ValidationReport:
    """Build the default validation suite for one spec.

    Passage rows run at (q, alpha, theta, x0, b); the jump-rate and ladder
    rows run at q = 0; the all-time-minimum and first-jump rows are added
    when the spec supports an unbiased or well-defined check (positive mean
    without a Gaussian component, jumps present).
    """
    if spec.gaussian_sq > 0.0 and dt is None:
        raise ConfigError("a Gaussian component requires --dt for validation")
    use_dt = dt
    x0 = b / 2.0 if x0 is None else x0
    ev = _evaluator(spec, q, "auto")
    if alpha is None:
        alpha = ev.phi_q + 0.5
    query = TransformQuery(q=q, alpha=alpha, theta=theta, x0=x0, b=b)
    report = ValidationReport()
    row = 0

    up = upper_passage_transform(ev, query).value
    est = estimate_passage_functional(
        spec, q, alpha, 0.0, x0, b, "upper", paths, seed,
        dt=use_dt, stream_offset=row * _ROW_STRIDE,
    )
    report.rows.append(ReportRow("upper_passage", q, alpha, 0.0, x0, b,
                                 up, est.mean, est.std_error))
    row += 1

    lo = lower_passage_transform(ev, query).value
    est = estimate_passage_functional(
        spec, q, alpha, theta, x0, b, "lower", paths, seed,
        dt=use_dt, stream_offset=row * _ROW_STRIDE,
    )
    report.rows.append(ReportRow("lower_passage", q, alpha, theta, x0, b,
                                 lo, est.mean, est.std_error))
    row += 1

    exit_an = two_sided_exit(ev, x0, b - x0)
    est = estimate_two_sided_exit(
        spec, q, x0, b - x0, paths, seed, dt=use_dt,
        stream_offset=row * _ROW_STRIDE,
    )
    report.rows.append(ReportRow("two_sided_exit", q, math.nan, math.nan,
                                 x0, b, exit_an, est.mean, est.std_error))
    row += 1

    ev0 = _evaluator(spec, 0.0, "auto")
    x_max = 25.0
    ilt = estimate_inverse_local_time_process(
        spec, b, x_max, 200, seed, dt=use_dt, stream_offset=row * _ROW_STRIDE
    )
    rate_an = local_time_jump_rate(ev0, b)
    report.rows.append(ReportRow("ladder_jump_rate", 0.0, math.nan, math.nan,
                                 math.nan, b, rate_an,
                                 ilt.jump_rate.mean, ilt.jump_rate.std_error))
    row += 1

    tr = ilt.increment_transform(alpha)
    tr_an = math.exp(inverse_local_time_exponent(ev0, 0.0, alpha, b))
    report.rows.append(ReportRow("ladder_increment", 0.0, alpha, math.nan,
                                 math.nan, b, tr_an, tr.mean, tr.std_error))
    row += 1

    if spec.gaussian_sq == 0.0 and spec.mean > 0.0:
        pk_alpha = 1.0
        pk_an = minimum_transform(spec, pk_alpha)
        horizon = max(40.0, 40.0 / spec.mean)
        est = estimate_minimum_transform(
            spec, pk_alpha, horizon, paths, seed, stream_offset=row * _ROW_STRIDE
        )
        report.rows.append(ReportRow("minimum_transform", 0.0, pk_alpha,
                                     math.nan, 0.0, math.inf, pk_an,
                                     est.mean, est.std_error))
        row += 1

    if spec.jump_intensity > 0.0:
        fj_alpha = 0.4 * spec.min_jump_rate
        fj_theta = 0.5
        fj_an = first_jump_transform(
            spec.jump_intensity,
            lambda a: spec.jump_size_transform(-a),
            fj_alpha,
            fj_theta,
        )
        est = estimate_first_jump_transform(
            spec.jump_intensity, spec.jump_mixture, fj_alpha, fj_theta,
            paths, seed, jump_sign=-1.0, stream_offset=row * _ROW_STRIDE,
        )
        report.rows.append(ReportRow("first_jump", 0.0, fj_alpha, fj_theta,
                                     math.nan, math.nan, fj_an,
                                     est.mean, est.std_error))
        row += 1

    return report


def run_command(argv) -> int:
    """Run one CLI invocation; returns the exit code instead of exiting."""
    try:
        cli.main(args=list(argv), standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        return 2
    except LevyFluctError as exc:
        click.echo(f"error: {exc}", err=True)
        return 2
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    except Exception as exc:  # contract: no traceback on bad input
        click.echo(f"error: {exc}", err=True)
        return 2
    return 0


def main(argv=None) -> None:
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
