"""
Command-line entry point.

Every command prints its result to stdout (CSV or JSON) and, with --out-dir, also writes the result
file plus a manifest.json recording the configuration, seed, and output hashes.
"""

import json
import logging
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Any

import asyncclick as click
import numpy as np
from numpy.typing import NDArray

from quickdetect.config import ExperimentConfig, load_config
from quickdetect.detection import (
    RuleKind,
    StoppingRule,
    bayes_threshold,
    run_rule,
    schedule_from_beta,
    write_trace_csv,
)
from quickdetect.info import first_order_risk, info_number_empirical, information_number
from quickdetect.models import ChangeModel, PathSpec, export_path_csv, simulate_path
from quickdetect.montecarlo import (
    CalibrationError,
    Estimate,
    EstimationError,
    LcpfaTarget,
    calibrate_threshold,
    estimate_lcpfa,
    estimate_max_risk,
    estimate_moment_risk,
    estimate_statistic_mean,
    estimate_weighted_pfa,
    max_llr_diagnostic,
    run_table,
    slln_diagnostic,
)
from quickdetect.reporting import RunManifest, estimates_csv, table_csv

logger = logging.getLogger(__name__)

MIN_TABLE_REPLICATIONS = 10_000


@contextmanager
def _errors_as_click() -> Iterator[None]:
    try:
        yield
    except (ValueError, EstimationError, CalibrationError) as e:
        raise click.ClickException(str(e)) from e


def parse_theta(text: str, model: ChangeModel) -> NDArray[np.float64]:
    """Parse "0.9", "0.5,0.2" or a matrix written row by row as "0.5,0;0,0.5"."""
    try:
        values = [[float(v) for v in row.split(",")] for row in text.split(";")]
        return np.asarray(values, dtype=float).reshape(model.param_shape)
    except ValueError as e:
        raise click.BadParameter(f"Cannot read {text!r} as a parameter of shape {model.param_shape}") from e


def build_rule(config: ExperimentConfig, kind: str, threshold: float, theta: str | None) -> StoppingRule:
    if RuleKind(kind) is RuleKind.WSR:
        return StoppingRule.wsr(config.parameter_grid, threshold)
    if theta is None:
        raise click.UsageError("--theta is required for an SR rule")
    return StoppingRule.sr(config.change_model.validate_theta(parse_theta(theta, config.change_model)), threshold)


def publish(
    command: str,
    fmt: str,
    out_dir: Path | None,
    manifest: RunManifest,
    csv_text: str,
    payload: Any,
) -> None:
    """Print the result and, when an output directory is given, persist it with its manifest."""
    text = csv_text if fmt == "csv" else json.dumps(payload, indent=2, sort_keys=True) + "\n"
    click.echo(text, nl=False)
    if out_dir is None:
        return
    path = out_dir / f"{command}.{fmt}"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text)
    manifest.finish(out_dir, [path])


def publish_estimates(
    command: str, fmt: str, out_dir: Path | None, manifest: RunManifest, estimates: dict[str, Estimate]
) -> None:
    payload = {label: estimate.model_dump(mode="json") for label, estimate in estimates.items()}
    publish(command, fmt, out_dir, manifest, estimates_csv(estimates), payload)


def experiment_options(f: Callable) -> Callable:
    """Options shared by every simulation command."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            required=True,
            help="TOML experiment config",
        ),
        click.option("--seed", type=int, default=None, help="Master seed (overrides the config)"),
        click.option("--reps", type=click.IntRange(min=1), default=None, help="Replications (overrides the config)"),
        click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker processes"),
        click.option(
            "--out-dir",
            type=click.Path(file_okay=False, path_type=Path),
            default=None,
            help="Directory for the result file and manifest.json",
        ),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def rule_options(f: Callable) -> Callable:
    options = [
        click.option("--rule", "kind", type=click.Choice([k.value for k in RuleKind]), default=RuleKind.WSR.value),
        click.option("--a", "threshold", type=float, default=None, help="Threshold in nats"),
        click.option("--theta", default=None, help="Post-change parameter (SR tuning and true parameter)"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def start_run(command: str, config_path: Path, seed: int | None, reps: int | None, threads: int | None, **parameters):
    """Load the config and open a manifest for a simulation command."""
    config = load_config(config_path)
    settings = config.simulation_settings(replications=reps, seed=seed, threads=threads)
    manifest = RunManifest.start(
        command,
        parameters={"config_path": str(config_path), "replications": settings.replications, **parameters},
        config=config.model_dump(mode="json"),
        seed=settings.seed,
    )
    return config, settings, manifest


def require_threshold(threshold: float | None) -> float:
    if threshold is None:
        raise click.UsageError("--a is required")
    return threshold


@click.group()
@click.option("--verbose", is_flag=True, help="Log debug output to stderr")
async def main(verbose: bool):
    """Weighted Shiryaev-Roberts change-point detection and its Monte Carlo harness."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


@main.command()
@click.option("--beta", type=float, required=True, help="LCPFA bound")
@click.option("--kappa", "kappa_check", type=float, default=1.0, show_default=True, help="Ratio of span to window")
@click.option("--delta-star", type=float, default=0.5, show_default=True)
@click.option("--out-dir", type=click.Path(file_okay=False, path_type=Path), default=None)
async def schedule(beta: float, kappa_check: float, delta_star: float, out_dir: Path | None):
    """Print the window, span and threshold of the LCPFA schedule for BETA."""
    with _errors_as_click():
        params = schedule_from_beta(beta, kappa_check, delta_star)
    payload = params.model_dump(mode="json")
    manifest = RunManifest.start("schedule", parameters={"beta": beta, "kappa": kappa_check, "delta_star": delta_star})
    publish("schedule", "json", out_dir, manifest, "", payload)


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@rule_options
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--horizon", type=click.IntRange(min=1), default=10_000, show_default=True)
@click.option(
    "--change-point", type=click.IntRange(min=0), default=None, help="Last pre-change index; omit for no change"
)
@click.option("--true-theta", default=None, help="Post-change parameter of the simulated stream")
@click.option("--trace", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Per-step CSV trace")
@click.option("--path-csv", type=click.Path(dir_okay=False, path_type=Path), default=None, help="Export the stream")
async def run(
    config_path: Path,
    kind: str,
    threshold: float | None,
    theta: str | None,
    seed: int,
    horizon: int,
    change_point: int | None,
    true_theta: str | None,
    trace: Path | None,
    path_csv: Path | None,
):
    """Simulate one stream and print the stopping time of the rule on it."""
    with _errors_as_click():
        config = load_config(config_path)
        model = config.change_model
        rule = build_rule(config, kind, require_threshold(threshold), theta)
        post = None
        if change_point is not None:
            source = true_theta if true_theta is not None else theta
            if source is None:
                raise click.UsageError("--true-theta is required with --change-point")
            post = parse_theta(source, model)
        observations = simulate_path(model, PathSpec(change_point, post, horizon, seed))
        if path_csv is not None:
            export_path_csv(path_csv, observations)
        outcome = run_rule(rule, model, observations, record_trace=trace is not None)
        if trace is not None and outcome.trace is not None:
            write_trace_csv(trace, outcome.trace, rule.grid)
    click.echo(json.dumps({"stopped": outcome.stopped, "tau": outcome.time, "statistic": outcome.statistic}))


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False, path_type=Path), required=True)
@click.option("--theta", required=True)
@click.option("--empirical", is_flag=True, help="Estimate by simulation even when an analytic value exists")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--reps", type=click.IntRange(min=2), default=200, show_default=True)
@click.option("--n", "length", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--a", "threshold", type=float, default=None, help="Also print the first-order delay at this threshold")
async def info(
    config_path: Path, theta: str, empirical: bool, seed: int, reps: int, length: int, threshold: float | None
):
    """Print the information number of THETA against the configured pre-change model."""
    with _errors_as_click():
        config = load_config(config_path)
        model = config.change_model
        point = parse_theta(theta, model)
        options = {"burn_in": config.experiment.burn_in, "n": length, "reps": reps, "seed": seed}
        if empirical:
            result = info_number_empirical(model, point, **options)
        else:
            result = information_number(model, point, **options)
        payload: dict[str, Any] = result.model_dump(mode="json")
        if threshold is not None:
            payload["first_order_delay"] = first_order_risk(threshold, result)
    click.echo(json.dumps(payload, indent=2, sort_keys=True))


@main.command()
@experiment_options
@rule_options
@click.option("--change-point", "change_points", type=click.IntRange(min=0), multiple=True)
@click.option("--moment", "r", type=float, default=None, help="Moment order r (default: config moment_orders)")
@click.option("--max-risk", is_flag=True, help="Also report the worst change point")
async def simulate(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    kind: str,
    threshold: float | None,
    theta: str | None,
    change_points: tuple[int, ...],
    r: float | None,
    max_risk: bool,
):
    """Estimate conditional delay moments of a rule after a change to THETA."""
    with _errors_as_click():
        config, settings, manifest = start_run(
            "simulate", config_path, seed, reps, threads, rule=kind, a=threshold, theta=theta
        )
        if theta is None:
            raise click.UsageError("--theta is required")
        rule = build_rule(config, kind, require_threshold(threshold), theta)
        true_theta = parse_theta(theta, config.change_model)
        nus = list(change_points) or config.experiment.change_points
        orders = [r] if r is not None else config.experiment.moment_orders
        estimates = {}
        for order in orders:
            for nu in nus:
                estimates[f"nu={nu},r={order:g}"] = estimate_moment_risk(
                    rule, config.change_model, true_theta, nu, order, settings
                )
            if max_risk:
                worst = estimate_max_risk(rule, config.change_model, true_theta, nus, order, settings)
                estimates[f"max,nu={worst.change_point},r={order:g}"] = worst.estimate
    publish_estimates("simulate", fmt, out_dir, manifest, estimates)


@main.command()
@experiment_options
@rule_options
@click.option("--ell", type=click.IntRange(min=1), default=None, help="Span (default: config)")
@click.option("--m", type=click.IntRange(min=1), default=None, help="Window (default: config)")
@click.option("--form", type=click.Choice(["bound", "exact"]), default="bound", show_default=True)
@click.option("--schedule-beta", type=float, default=None, help="Evaluate the scheduled rule for this beta")
async def lcpfa(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    kind: str,
    threshold: float | None,
    theta: str | None,
    ell: int | None,
    m: int | None,
    form: str,
    schedule_beta: float | None,
):
    """Estimate the local conditional probability of false alarm."""
    with _errors_as_click():
        config, settings, manifest = start_run(
            "lcpfa", config_path, seed, reps, threads, rule=kind, a=threshold, schedule_beta=schedule_beta
        )
        if schedule_beta is not None:
            params = schedule_from_beta(schedule_beta, config.rules.kappa_check, config.rules.delta_star)
            rule = StoppingRule.for_schedule(config.parameter_grid, params)
            ell, m = params.ell, params.m
        else:
            rule = build_rule(config, kind, require_threshold(threshold), theta)
        ell = ell if ell is not None else config.experiment.ell
        m = m if m is not None else config.experiment.m
        estimate = estimate_lcpfa(rule, config.change_model, ell, m, settings, form=form)  # type: ignore[arg-type]
    publish_estimates("lcpfa", fmt, out_dir, manifest, {f"a={rule.threshold:.6g},ell={ell},m={m}": estimate})


@main.command()
@experiment_options
@rule_options
@click.option("--rho", type=float, required=True, help="Parameter of the geometric change-point prior")
@click.option("--alpha", type=float, default=None, help="PFA level; sets a = log((1 - rho) / (rho alpha))")
async def pfa(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    kind: str,
    threshold: float | None,
    theta: str | None,
    rho: float,
    alpha: float | None,
):
    """Estimate the weighted probability of false alarm under a geometric prior."""
    with _errors_as_click():
        config, settings, manifest = start_run(
            "pfa", config_path, seed, reps, threads, rule=kind, a=threshold, rho=rho, alpha=alpha
        )
        if threshold is None and alpha is not None:
            threshold = bayes_threshold(alpha, rho=rho)
        rule = build_rule(config, kind, require_threshold(threshold), theta)
        estimate = estimate_weighted_pfa(rule, config.change_model, rho, settings)
    publish_estimates("pfa", fmt, out_dir, manifest, {f"a={rule.threshold:.6g},rho={rho:g}": estimate})


@main.command()
@experiment_options
@click.option("--rule", "kind", type=click.Choice([k.value for k in RuleKind]), default=RuleKind.WSR.value)
@click.option("--theta", default=None, help="SR tuning parameter")
@click.option("--beta", type=float, required=True, help="LCPFA target")
@click.option("--ell", type=click.IntRange(min=1), default=None)
@click.option("--m", type=click.IntRange(min=1), default=None)
async def calibrate(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    kind: str,
    theta: str | None,
    beta: float,
    ell: int | None,
    m: int | None,
):
    """Find the threshold whose estimated LCPFA matches BETA."""
    with _errors_as_click():
        config, settings, manifest = start_run("calibrate", config_path, seed, reps, threads, rule=kind, beta=beta)
        target = LcpfaTarget(
            beta=beta,
            ell=ell if ell is not None else config.experiment.ell,
            m=m if m is not None else config.experiment.m,
        )
        rule = build_rule(config, kind, 0.0, theta)
        result = calibrate_threshold(rule, config.change_model, target, settings)
    label = f"a={result.threshold:.6g}"
    payload = result.model_dump(mode="json")
    publish("calibrate", fmt, out_dir, manifest, estimates_csv({label: result.achieved}), payload)


@main.command()
@experiment_options
@click.option("--no-lcpfa", is_flag=True, help="Skip the LCPFA column")
async def table1(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    no_lcpfa: bool,
):
    """Reproduce the operating-characteristics table described by the config's [[rules.rows]]."""
    with _errors_as_click():
        config, settings, manifest = start_run("table1", config_path, seed, reps, threads)
        if not config.rules.rows:
            raise click.UsageError("The config has no [[rules.rows]]")
        if settings.replications < MIN_TABLE_REPLICATIONS:
            logger.warning(
                "Running the table with %d replications; use at least %d for publishable intervals",
                settings.replications,
                MIN_TABLE_REPLICATIONS,
            )
        records = run_table(
            config.change_model,
            config.parameter_grid,
            config.table_rows(),
            config.experiment.change_points,
            settings,
            kinds=config.rules.kinds,
            ell=None if no_lcpfa else config.experiment.ell,
            m=None if no_lcpfa else config.experiment.m,
        )
    payload = [record.model_dump(mode="json") for record in records]
    publish("table1", fmt, out_dir, manifest, table_csv(records), payload)


@main.command()
@experiment_options
@click.option(
    "--kind",
    "diagnostic",
    type=click.Choice(["slln", "max-llr", "martingale"]),
    default="slln",
    show_default=True,
)
@click.option("--theta", default=None, help="Post-change parameter (slln, max-llr)")
@click.option("--change-point", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--n", "ns", type=click.IntRange(min=1), multiple=True, help="Sample sizes (default 100, 500, 2000)")
@click.option("--epsilon-factor", type=float, default=0.1, show_default=True, help="ε as a multiple of I_θ")
async def diagnose(
    config_path: Path,
    seed: int | None,
    reps: int | None,
    threads: int | None,
    out_dir: Path | None,
    fmt: str,
    diagnostic: str,
    theta: str | None,
    change_point: int,
    ns: tuple[int, ...],
    epsilon_factor: float,
):
    """Check LLR convergence after a change or the martingale mean of the WSR statistic."""
    with _errors_as_click():
        config, settings, manifest = start_run("diagnose", config_path, seed, reps, threads, kind=diagnostic)
        model = config.change_model
        sizes = list(ns) or [100, 500, 2000]
        estimates: dict[str, Estimate] = {}
        if diagnostic == "martingale":
            rule = StoppingRule.wsr(config.parameter_grid, 0.0)
            for n in sizes:
                estimates[f"n={n}"] = estimate_statistic_mean(rule, model, n, settings)
        else:
            if theta is None:
                raise click.UsageError("--theta is required for the slln and max-llr diagnostics")
            point = parse_theta(theta, model)
            rate = information_number(model, point).value
            epsilon = epsilon_factor * rate
            if diagnostic == "slln":
                for n, estimate in slln_diagnostic(model, point, change_point, sizes, epsilon, settings, rate).items():
                    estimates[f"n={n}"] = estimate
            else:
                for n in sizes:
                    estimates[f"N={n}"] = max_llr_diagnostic(model, point, change_point, n, epsilon, settings, rate)
    publish_estimates("diagnose", fmt, out_dir, manifest, estimates)


if __name__ == "__main__":
    main()
