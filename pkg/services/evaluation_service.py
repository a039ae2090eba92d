# services/evaluation_service.py
"""평가 지표와 합성 벤치마크 / 환기 시간 스윕"""

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from config.constants import SWEEP_COLUMNS
from core.config_loader import ExperimentConfig
from core.errors import ValidationError
from models.metrics import MetricsReport
from models.physics import PhysicsConfig
from models.series import DecodedPath, LabeledTrace, OccupancyLabels
from models.state_space import build_state_space
from models.switching_ar import init_from_physics
from services.simulation_service import SimulationService
from solver.em_solver import fit_em_viterbi
from solver.hmm_solver import decode_simple_hmm, fit_simple_hmm

logger = logging.getLogger(__name__)


class EvaluationService:
    """디코딩 평가와 실험 하네스"""

    # === 지표 ===

    @staticmethod
    def score(path: DecodedPath, truth: OccupancyLabels, dt: float = 1.0,
              max_occupancy: Optional[int] = None) -> MetricsReport:
        """스텝별 인원 정확도, 혼동행렬, 평균 검출 지연 (분)

        검출 지연: 참 인원 변화 시점부터 처음 맞춘 스텝까지의 스텝 수,
        다음 변화 시점에서 상한.
        """
        if len(path) != len(truth):
            raise ValidationError(f"score: path length {len(path)} does not match truth length {len(truth)}")
        if len(truth) == 0:
            raise ValidationError("score: empty label sequence")

        pred = path.occupancy
        true = truth.occupancy
        size = int(max(pred.max(), true.max())) + 1
        if max_occupancy is not None:
            size = max(size, int(max_occupancy) + 1)
        confusion = np.zeros((size, size), dtype=int)
        np.add.at(confusion, (true, pred), 1)

        correct = pred == true
        changes = np.flatnonzero(true[1:] != true[:-1]) + 1
        delays = []
        bounds = np.append(changes, true.size)
        for start, stop in zip(changes, bounds[1:]):
            hits = np.flatnonzero(correct[start:stop])
            delays.append(int(hits[0]) if hits.size else int(stop - start))
        mean_delay = float(np.mean(delays)) * dt if delays else 0.0

        regime_accuracy = None
        if truth.regime is not None:
            regime_accuracy = float(np.mean(path.regime == truth.regime))

        return MetricsReport(
            accuracy=float(np.trace(confusion) / confusion.sum()),
            confusion=confusion,
            mean_detection_delay=mean_delay,
            regime_accuracy=regime_accuracy,
            n_steps=int(true.size),
            n_changes=int(changes.size),
        )

    # === 실험 ===

    @staticmethod
    def perturbed_physics(physics: PhysicsConfig, perturbation: float,
                          rng: np.random.Generator) -> PhysicsConfig:
        """환기 시간에 [1-p, 1+p] 균등 배율을 곱한 초기화용 물리 설정"""
        if perturbation <= 0:
            return physics
        factors = rng.uniform(1.0 - perturbation, 1.0 + perturbation, size=physics.n_regimes)
        return physics.with_regimes(np.array(physics.regimes) * factors)

    @staticmethod
    def run_trial(config: ExperimentConfig, physics: PhysicsConfig,
                  seed_seq: np.random.SeedSequence) -> Dict[str, float]:
        """시뮬레이션 1회 -> 스위칭 AR / 단순 HMM 피팅과 디코딩 -> 정확도"""
        schedule_seed, noise_seed, init_seed = seed_seq.spawn(3)
        sim = config.simulation
        schedule = SimulationService.random_schedule(
            physics, sim.total_minutes, sim.mean_dwell, sim.regime_mean_dwell, seed=schedule_seed,
            occupied_window=sim.occupied_window)
        trace = SimulationService.simulate(physics, schedule, sim.y0, sim.noise_sd, seed=noise_seed)

        init_physics = EvaluationService.perturbed_physics(
            physics, config.init.perturbation, np.random.default_rng(init_seed))
        space = build_state_space(physics)
        model0 = init_from_physics(init_physics, space, config.init.sigma0, config.init.self_stay)
        report = fit_em_viterbi(model0, trace.series, config.fit)
        msar = EvaluationService.score(report.final_path, trace.truth, physics.dt, physics.max_occupancy)

        hmm = fit_simple_hmm(trace.series, physics.max_occupancy + 1, config.fit)
        baseline = EvaluationService.score(
            decode_simple_hmm(hmm, trace.series), OccupancyLabels(trace.truth.occupancy),
            physics.dt, physics.max_occupancy)

        return {
            "acc_msar": msar.accuracy,
            "acc_hmm": baseline.accuracy,
            "regime_acc_msar": msar.regime_accuracy,
            "delay_msar": msar.mean_detection_delay,
            "delay_hmm": baseline.mean_detection_delay,
        }

    @staticmethod
    def synthetic_benchmark(config: ExperimentConfig, seeds: Iterable[int]) -> pd.DataFrame:
        """시드별 1 행: seed, acc_msar, acc_hmm, regime_acc_msar, delay_msar, delay_hmm"""
        rows = []
        for seed in seeds:
            result = EvaluationService.run_trial(config, config.physics, np.random.SeedSequence(int(seed)))
            logger.info("seed %d: acc_msar=%.4f acc_hmm=%.4f", seed, result["acc_msar"], result["acc_hmm"])
            rows.append({"seed": int(seed), **result})
        return pd.DataFrame(rows)

    @staticmethod
    def ventilation_sweep(taus: Sequence[float], trials: int, base_config: ExperimentConfig,
                          seed: int, workers: int = 1) -> pd.DataFrame:
        """tau 별 단일 모드 트레이스로 두 모델의 평균 정확도 비교

        시행 (i, j) 의 난수열은 SeedSequence(seed, spawn_key=(i, j)) 에서 파생되므로
        결과는 workers 수와 무관하다.
        """
        if trials < 1:
            raise ValidationError(f"sweep.trials: must be >= 1 (got {trials})")
        if workers < 1:
            raise ValidationError(f"sweep.workers: must be >= 1 (got {workers})")
        taus = [float(t) for t in taus]
        if not taus:
            raise ValidationError("sweep.taus: at least one ventilation time is required")

        jobs = [(base_config, tau, i, j, int(seed)) for i, tau in enumerate(taus) for j in range(trials)]
        if workers == 1:
            results = [_sweep_task(job) for job in jobs]
        else:
            with ProcessPoolExecutor(max_workers=workers) as ex:
                results = list(ex.map(_sweep_task, jobs))

        rows = []
        for i, tau in enumerate(taus):
            chunk = [r for r in results if r[0] == i]
            rows.append({
                "tau_min": tau,
                "acc_msar": float(np.mean([r[1] for r in chunk])),
                "acc_hmm": float(np.mean([r[2] for r in chunk])),
                "trials": int(trials),
            })
            logger.info("tau=%g: acc_msar=%.4f acc_hmm=%.4f", tau, rows[-1]["acc_msar"], rows[-1]["acc_hmm"])
        return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def _sweep_task(job: Tuple[ExperimentConfig, float, int, int, int]) -> Tuple[int, float, float]:
    """프로세스 풀 작업 단위 (모듈 최상위여야 pickle 가능)"""
    config, tau, tau_index, trial, seed = job
    physics = config.physics.with_regimes([tau])
    seed_seq = np.random.SeedSequence(seed, spawn_key=(tau_index, trial))
    result = EvaluationService.run_trial(config, physics, seed_seq)
    return tau_index, result["acc_msar"], result["acc_hmm"]


def score(path: DecodedPath, truth, dt: float = 1.0, max_occupancy: Optional[int] = None) -> MetricsReport:
    """truth 는 OccupancyLabels 또는 LabeledTrace"""
    if isinstance(truth, LabeledTrace):
        dt = truth.series.dt
        truth = truth.truth
    return EvaluationService.score(path, truth, dt, max_occupancy)


def synthetic_benchmark(config: ExperimentConfig, seeds: Iterable[int]) -> pd.DataFrame:
    return EvaluationService.synthetic_benchmark(config, seeds)


def ventilation_sweep(taus: Sequence[float], trials: int, base_config: ExperimentConfig,
                      seed: int, workers: int = 1) -> pd.DataFrame:
    return EvaluationService.ventilation_sweep(taus, trials, base_config, seed, workers)
