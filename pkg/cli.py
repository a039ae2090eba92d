# cli.py
"""CO2 Occupancy Tracker - 명령행 진입점 (simulate / fit / decode / score / sweep)"""

import dataclasses
import functools
import logging
import sys
from typing import Optional

import click
import numpy as np

from config.constants import APP_NAME, APP_VERSION
from core.config_loader import ExperimentConfig, load_config, save_config
from core.errors import OccupancyError, ValidationError
from core.logging_setup import setup_logging
from models.simple_hmm import SimpleHMM
from models.state_space import build_state_space
from models.switching_ar import SwitchingARModel, implied_ventilation_times, init_from_physics
from services.data_service import DataService
from services.evaluation_service import EvaluationService, score
from services.simulation_service import SimulationService
from solver.em_solver import fit_em_viterbi
from solver.hmm_solver import decode_simple_hmm, fit_simple_hmm
from solver.msar_solver import decode_with_posteriors

logger = logging.getLogger(__name__)


def handle_errors(func):
    """OccupancyError 를 종료 코드로 변환"""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except OccupancyError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(e.exit_code)
    return wrapper


def _resolve_config(config_path: Optional[str], seed: Optional[int],
                    ambient: Optional[float] = None) -> ExperimentConfig:
    config = load_config(config_path).with_seed(seed)
    if ambient is not None:
        config = dataclasses.replace(config, physics=dataclasses.replace(config.physics, ambient_co2=ambient))
    return config


def _provenance(config: ExperimentConfig, out: str):
    save_config(config, f"{out}.config.yaml")


def _check_labels(model: SwitchingARModel, labels):
    """트레이스 라벨이 모델 상태 공간 밖이면 검증 오류"""
    if labels is None or model.space is None:
        return
    space = model.space
    if labels.occupancy.max(initial=0) > space.max_occupancy:
        raise ValidationError(
            f"model.states: trace occupancy {labels.occupancy.max()} exceeds model max_occupancy "
            f"{space.max_occupancy}")
    if labels.regime is not None and labels.regime.max(initial=0) >= space.n_regimes:
        raise ValidationError(
            f"model.states: trace regime {labels.regime.max()} outside the model's {space.n_regimes} regimes")


common_config = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                             help="YAML experiment config (defaults if omitted)")
common_seed = click.option("--seed", type=int, default=None, help="Override the config seed")
common_ambient = click.option("--ambient", type=float, default=None,
                              help="Ambient CO2 in ppm (defaults to physics.ambient_co2)")
common_json = click.option("--json-report", type=click.Path(dir_okay=False), default=None,
                           help="Write a machine-readable report")


@click.group()
@click.version_option(APP_VERSION, prog_name=APP_NAME)
@click.option("--log-level", default="WARNING", show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
def cli(log_level: str):
    """CO2 time series occupancy estimation with a switching AR model."""
    setup_logging(log_level)


@cli.command()
@common_config
@common_seed
@common_ambient
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Trace CSV to write")
@handle_errors
def simulate(config_path, seed, ambient, out):
    """Simulate a labeled CO2 trace."""
    config = _resolve_config(config_path, seed, ambient)
    physics = config.physics
    sim = config.simulation
    schedule_seed, noise_seed, _ = np.random.SeedSequence(config.seed).spawn(3)

    schedule = SimulationService.random_schedule(
        physics, sim.total_minutes, sim.mean_dwell, sim.regime_mean_dwell, seed=schedule_seed,
        occupied_window=sim.occupied_window)
    trace = SimulationService.simulate(physics, schedule, sim.y0, sim.noise_sd, seed=noise_seed)
    DataService.write_trace(trace, out, physics.ambient_co2)
    _provenance(config, out)
    click.echo(f"wrote {len(trace.series)} samples ({len(schedule)} segments, "
               f"{trace.clamp_count} clamped) to {out}")


@cli.command()
@click.argument("trace", type=click.Path(dir_okay=False))
@common_config
@common_ambient
@common_json
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Model YAML to write")
@click.option("--init-model", type=click.Path(dir_okay=False), default=None,
              help="Continue from a saved switching-AR model (no start search or warm start)")
@click.option("--baseline", is_flag=True, help="Fit the simple Gaussian HMM instead")
@handle_errors
def fit(trace, config_path, ambient, json_report, out, init_model, baseline):
    """Fit a model to a CO2 trace."""
    config = _resolve_config(config_path, None, ambient)
    physics = config.physics
    series = DataService.load_series(trace, physics.ambient_co2)

    if baseline:
        model = fit_simple_hmm(series, physics.max_occupancy + 1, config.fit)
        DataService.save_model(model, out)
        _provenance(config, out)
        if json_report:
            DataService.write_json(model.to_dict(), json_report)
        click.echo(f"simple HMM means: {np.round(model.means, 2).tolist()}")
        return

    opts = config.fit
    if init_model:
        model0 = DataService.load_model(init_model)
        if not isinstance(model0, SwitchingARModel):
            raise ValidationError(f"init_model: {init_model} is not a switching-AR model")
        # 저장된 모델에서 그대로 이어서 학습
        opts = dataclasses.replace(opts, start_search=False, warm_start_steps=0)
    else:
        model0 = init_from_physics(physics, build_state_space(physics),
                                   config.init.sigma0, config.init.self_stay)

    report = fit_em_viterbi(model0, series, opts)
    DataService.save_model(report.final_model, out)
    DataService.write_fit_report(report, out)
    _provenance(config, out)
    if json_report:
        data = report.to_dict()
        if report.final_model.space is not None:
            data["tau_hat"] = implied_ventilation_times(report.final_model, series.dt).tolist()
        DataService.write_json(data, json_report)
    click.echo(report.summary())


@cli.command()
@click.argument("trace", type=click.Path(dir_okay=False))
@click.option("--model", "model_path", required=True, type=click.Path(dir_okay=False))
@common_config
@common_ambient
@common_json
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Decoded path CSV to write")
@handle_errors
def decode(trace, model_path, config_path, ambient, json_report, out):
    """Decode the occupancy path of a CO2 trace."""
    config = _resolve_config(config_path, None, ambient)
    model = DataService.load_model(model_path)
    series = DataService.load_series(trace, config.physics.ambient_co2)
    labels = DataService.load_labels(trace)

    summary = {}
    if isinstance(model, SimpleHMM):
        path = decode_simple_hmm(model, series)
    else:
        _check_labels(model, labels)
        path, path_score, evidence = decode_with_posteriors(model, series)
        summary = {"path_log_prob": path_score, "log_evidence": evidence}

    DataService.write_path(path, series.timestamps[1:], out)
    _provenance(config, out)

    if labels is not None and len(labels) == len(path):
        metrics = score(path, labels, series.dt)
        summary["metrics"] = metrics.to_dict()
        click.echo(metrics.summary())
    if json_report:
        DataService.write_json(summary, json_report)
    click.echo(f"wrote {len(path)} decoded steps to {out}")


@cli.command(name="score")
@click.argument("path_csv", type=click.Path(dir_okay=False))
@click.argument("trace", type=click.Path(dir_okay=False))
@common_json
@handle_errors
def score_cmd(path_csv, trace, json_report):
    """Score a decoded path CSV against a labeled trace."""
    path = DataService.read_path(path_csv)
    labels = DataService.load_labels(trace)
    if labels is None:
        raise ValidationError(f"trace: {trace} has no occupancy column")
    # co2_ppm 값은 쓰이지 않으므로 ambient 0 으로 간격만 검사
    series = DataService.load_series(trace, 0.0)
    metrics = EvaluationService.score(path, labels, series.dt)
    if json_report:
        DataService.write_json(metrics.to_dict(), json_report)
    click.echo(metrics.summary())


@cli.command()
@common_config
@common_seed
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Sweep CSV to write")
@click.option("--workers", type=int, default=None, help="Override sweep.workers")
@handle_errors
def sweep(config_path, seed, out, workers):
    """Run the ventilation-time sweep (switching AR vs simple HMM)."""
    config = _resolve_config(config_path, seed)
    settings = config.sweep
    if workers is not None:
        config = dataclasses.replace(config, sweep=dataclasses.replace(settings, workers=workers))
        settings = config.sweep

    table = EvaluationService.ventilation_sweep(
        settings.taus, settings.trials, config, config.seed, settings.workers)
    DataService.write_sweep(table, out)
    _provenance(config, out)
    click.echo(table.to_string(index=False))


if __name__ == "__main__":
    cli()
