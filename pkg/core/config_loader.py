# core/config_loader.py
"""실험 설정 (YAML) 로더"""

import copy
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import yaml

from config.default_experiments import DEFAULT_EXPERIMENT, EXPERIMENT_PRESETS
from core.errors import DataIOError, ValidationError, require
from models.physics import PhysicsConfig
from solver.base_solver import FitOptions

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ("physics", "simulation", "init", "fit", "sweep", "seed", "preset")


@dataclass(frozen=True)
class SimulationSettings:
    """합성 트레이스 설정"""
    total_minutes: float = DEFAULT_EXPERIMENT["simulation"]["total_minutes"]
    mean_dwell: float = DEFAULT_EXPERIMENT["simulation"]["mean_dwell"]
    regime_mean_dwell: float = DEFAULT_EXPERIMENT["simulation"]["regime_mean_dwell"]
    y0: float = DEFAULT_EXPERIMENT["simulation"]["y0"]
    noise_sd: float = DEFAULT_EXPERIMENT["simulation"]["noise_sd"]
    occupied_window: Optional[Tuple[float, float]] = None  # (시작, 끝) 분, 밖에서는 인원 0

    def __post_init__(self):
        require(math.isfinite(self.mean_dwell) and self.mean_dwell > 0, "simulation.mean_dwell",
                f"must be > 0 (got {self.mean_dwell})")
        require(math.isfinite(self.total_minutes) and self.total_minutes >= self.mean_dwell,
                "simulation.total_minutes", f"must be >= mean_dwell (got {self.total_minutes})")
        require(math.isfinite(self.regime_mean_dwell) and self.regime_mean_dwell > 0,
                "simulation.regime_mean_dwell", f"must be > 0 (got {self.regime_mean_dwell})")
        require(math.isfinite(self.y0) and self.y0 >= 0, "simulation.y0", f"must be >= 0 (got {self.y0})")
        require(math.isfinite(self.noise_sd) and self.noise_sd >= 0, "simulation.noise_sd",
                f"must be >= 0 (got {self.noise_sd})")
        if self.occupied_window is not None:
            window = tuple(float(v) for v in self.occupied_window)
            require(len(window) == 2 and all(math.isfinite(v) for v in window) and 0 <= window[0] < window[1],
                    "simulation.occupied_window", f"must be [start, end] with 0 <= start < end (got {list(window)})")
            object.__setattr__(self, "occupied_window", window)

    def to_dict(self) -> dict:
        return {
            "total_minutes": float(self.total_minutes),
            "mean_dwell": float(self.mean_dwell),
            "regime_mean_dwell": float(self.regime_mean_dwell),
            "y0": float(self.y0),
            "noise_sd": float(self.noise_sd),
            "occupied_window": list(self.occupied_window) if self.occupied_window is not None else None,
        }


@dataclass(frozen=True)
class InitSettings:
    """물리 기반 초기화 설정"""
    sigma0: float = DEFAULT_EXPERIMENT["init"]["sigma0"]
    self_stay: float = DEFAULT_EXPERIMENT["init"]["self_stay"]
    perturbation: float = DEFAULT_EXPERIMENT["init"]["perturbation"]  # tau 배율 [1-p, 1+p]

    def __post_init__(self):
        require(math.isfinite(self.sigma0) and self.sigma0 > 0, "init.sigma0", f"must be > 0 (got {self.sigma0})")
        require(0 < self.self_stay < 1, "init.self_stay", f"must lie in (0, 1) (got {self.self_stay})")
        require(0 <= self.perturbation < 1, "init.perturbation",
                f"must lie in [0, 1) (got {self.perturbation})")

    def to_dict(self) -> dict:
        return {
            "sigma0": float(self.sigma0),
            "self_stay": float(self.self_stay),
            "perturbation": float(self.perturbation),
        }


@dataclass(frozen=True)
class SweepSettings:
    """환기 시간 스윕 설정"""
    taus: Tuple[float, ...] = tuple(DEFAULT_EXPERIMENT["sweep"]["taus"])
    trials: int = DEFAULT_EXPERIMENT["sweep"]["trials"]
    workers: int = DEFAULT_EXPERIMENT["sweep"]["workers"]

    def __post_init__(self):
        object.__setattr__(self, "taus", tuple(float(t) for t in self.taus))
        require(len(self.taus) > 0, "sweep.taus", "at least one ventilation time is required")
        for tau in self.taus:
            require(math.isfinite(tau) and tau > 0, "sweep.taus", f"ventilation times must be > 0 (got {tau})")
        require(int(self.trials) == self.trials and self.trials >= 1, "sweep.trials",
                f"must be an integer >= 1 (got {self.trials})")
        require(int(self.workers) == self.workers and self.workers >= 1, "sweep.workers",
                f"must be an integer >= 1 (got {self.workers})")

    def to_dict(self) -> dict:
        return {"taus": [float(t) for t in self.taus], "trials": int(self.trials), "workers": int(self.workers)}


@dataclass(frozen=True)
class ExperimentConfig:
    """simulate / fit / sweep 공용 실험 설정"""
    physics: PhysicsConfig = field(default_factory=PhysicsConfig)
    simulation: SimulationSettings = field(default_factory=SimulationSettings)
    init: InitSettings = field(default_factory=InitSettings)
    fit: FitOptions = field(default_factory=FitOptions)
    sweep: SweepSettings = field(default_factory=SweepSettings)
    seed: int = 0
    preset: Optional[str] = None

    def __post_init__(self):
        require(isinstance(self.seed, int) and not isinstance(self.seed, bool) and self.seed >= 0,
                "seed", f"must be a non-negative integer (got {self.seed!r})")

    def with_seed(self, seed: Optional[int]) -> "ExperimentConfig":
        """시드만 교체 (None 이면 그대로)"""
        if seed is None:
            return self
        return ExperimentConfig(self.physics, self.simulation, self.init, self.fit,
                                self.sweep, int(seed), self.preset)

    @classmethod
    def from_dict(cls, data: Optional[Dict[str, Any]] = None) -> "ExperimentConfig":
        """기본값 <- 프리셋 <- 사용자 값 순으로 병합 후 검증"""
        data = data or {}
        if not isinstance(data, dict):
            raise ValidationError("config: top level must be a mapping of sections")
        _check_keys(data, DEFAULT_EXPERIMENT, "", allowed_extra=("preset",))

        preset = data.get("preset")
        merged = copy.deepcopy(DEFAULT_EXPERIMENT)
        if preset is not None:
            if preset not in EXPERIMENT_PRESETS:
                raise ValidationError(
                    f"preset: unknown preset {preset!r} (available: {', '.join(EXPERIMENT_PRESETS)})")
            _deep_update(merged, EXPERIMENT_PRESETS[preset]["overrides"])
        _deep_update(merged, {k: v for k, v in data.items() if k != "preset"})

        try:
            sim = merged["simulation"]
            init = merged["init"]
            sweep = merged["sweep"]
            return cls(
                physics=PhysicsConfig.from_dict(merged["physics"]),
                simulation=SimulationSettings(
                    total_minutes=float(sim["total_minutes"]),
                    mean_dwell=float(sim["mean_dwell"]),
                    regime_mean_dwell=float(sim["regime_mean_dwell"]),
                    y0=float(sim["y0"]),
                    noise_sd=float(sim["noise_sd"]),
                    occupied_window=_window(sim.get("occupied_window")),
                ),
                init=InitSettings(
                    sigma0=float(init["sigma0"]),
                    self_stay=float(init["self_stay"]),
                    perturbation=float(init["perturbation"]),
                ),
                fit=FitOptions.from_dict(merged["fit"]),
                sweep=SweepSettings(
                    taus=tuple(float(t) for t in _as_list(sweep["taus"])),
                    trials=int(sweep["trials"]),
                    workers=int(sweep["workers"]),
                ),
                seed=merged["seed"],
                preset=preset,
            )
        except ValidationError:
            raise
        except (TypeError, ValueError) as e:
            raise ValidationError(f"config: {e}") from e

    def to_dict(self) -> dict:
        """모든 기본값이 채워진 설정 (출력 옆에 기록)"""
        result = {
            "physics": self.physics.to_dict(),
            "simulation": self.simulation.to_dict(),
            "init": self.init.to_dict(),
            "fit": self.fit.to_dict(),
            "sweep": self.sweep.to_dict(),
            "seed": int(self.seed),
        }
        if self.preset is not None:
            result["preset"] = self.preset
        return result


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _window(value) -> Optional[Tuple[float, ...]]:
    if value is None:
        return None
    if not isinstance(value, (list, tuple)):
        raise ValidationError(f"simulation.occupied_window: expected [start, end] (got {value!r})")
    return tuple(float(v) for v in value)


def _check_keys(data: dict, reference: dict, prefix: str, allowed_extra: Tuple[str, ...] = ()):
    """reference 에 없는 키는 점 표기 경로로 오류"""
    for key, value in data.items():
        path = f"{prefix}{key}"
        if key in allowed_extra:
            continue
        if key not in reference:
            raise ValidationError(f"{path}: unknown configuration key")
        if isinstance(reference[key], dict):
            if not isinstance(value, dict):
                raise ValidationError(f"{path}: expected a section of key-value pairs")
            _check_keys(value, reference[key], f"{path}.")


def _deep_update(target: dict, overrides: dict):
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _deep_update(target[key], value)
        else:
            target[key] = copy.deepcopy(value)


def load_config(path: Union[str, Path, None] = None) -> ExperimentConfig:
    """YAML 설정 파일 로드. path 가 None 이면 기본 설정"""
    if path is None:
        return ExperimentConfig.from_dict({})
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataIOError(f"cannot read config {path}: {e.strerror or e}") from e
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        raise DataIOError(f"{path}: invalid YAML ({getattr(e, 'problem', e)})",
                          line=mark.line + 1 if mark is not None else None) from e
    logger.debug("loaded config %s", path)
    return ExperimentConfig.from_dict(data or {})


def save_config(config: ExperimentConfig, path: Union[str, Path]):
    """해석된 설정을 YAML 로 기록"""
    path = Path(path)
    try:
        path.write_text(yaml.safe_dump(config.to_dict(), sort_keys=False), encoding="utf-8")
    except OSError as e:
        raise DataIOError(f"cannot write {path}: {e.strerror or e}") from e
