# config/default_experiments.py
"""기본 실험 설정 정의"""

from config.constants import (
    DEFAULT_AMBIENT_CO2, DEFAULT_REGIMES, DEFAULT_PERSON_RATE, DEFAULT_DT,
    DEFAULT_MAX_OCCUPANCY, DEFAULT_SIGMA0, DEFAULT_SELF_STAY,
    DEFAULT_MAX_ITERS, DEFAULT_TOL, DEFAULT_MIN_STATE_WEIGHT,
    DEFAULT_TRANSITION_SMOOTHING, DEFAULT_TOTAL_MINUTES, DEFAULT_MEAN_DWELL,
    DEFAULT_REGIME_MEAN_DWELL, DEFAULT_NOISE_SD, DEFAULT_SWEEP_TAUS,
    DEFAULT_SWEEP_TRIALS, DEFAULT_WARM_START_STEPS,
)

# 합성 데이터의 노이즈 수준과 스케줄 통계 기본값
DEFAULT_EXPERIMENT = {
    "physics": {
        "ambient_co2": DEFAULT_AMBIENT_CO2,
        "regimes": list(DEFAULT_REGIMES),
        "person_rate": DEFAULT_PERSON_RATE,
        "dt": DEFAULT_DT,
        "max_occupancy": DEFAULT_MAX_OCCUPANCY,
    },
    "simulation": {
        "total_minutes": DEFAULT_TOTAL_MINUTES,
        "mean_dwell": DEFAULT_MEAN_DWELL,
        "regime_mean_dwell": DEFAULT_REGIME_MEAN_DWELL,
        "y0": 0.0,
        "noise_sd": DEFAULT_NOISE_SD,
        "occupied_window": None,
    },
    "init": {
        "sigma0": DEFAULT_SIGMA0,
        "self_stay": DEFAULT_SELF_STAY,
        "perturbation": 0.2,
    },
    "fit": {
        "max_iters": DEFAULT_MAX_ITERS,
        "tol": DEFAULT_TOL,
        "tie_c_by_regime": True,
        "tie_sigma_global": True,
        "min_state_weight": DEFAULT_MIN_STATE_WEIGHT,
        "transition_smoothing": DEFAULT_TRANSITION_SMOOTHING,
        "factor_transitions": True,
        "start_search": True,
        "warm_start_steps": DEFAULT_WARM_START_STEPS,
    },
    "sweep": {
        "taus": list(DEFAULT_SWEEP_TAUS),
        "trials": DEFAULT_SWEEP_TRIALS,
        "workers": 1,
    },
    "seed": 0,
}


# 프리셋 (DEFAULT_EXPERIMENT 위에 덮어쓰는 부분 설정)
EXPERIMENT_PRESETS = {
    "synthetic_day": {
        "name_ko": "하루 합성 데이터 (2개 환기 모드)",
        "name_en": "Synthetic day, two ventilation regimes",
        "overrides": {
            "simulation": {"occupied_window": [480.0, 1080.0]},
        },
    },
    "low_noise": {
        "name_ko": "저잡음 파라미터 복원",
        "name_en": "Low-noise parameter recovery",
        "overrides": {
            "simulation": {"noise_sd": 0.5},
            "init": {"sigma0": 0.5, "perturbation": 0.0},
        },
    },
    "ventilation_sweep": {
        "name_ko": "환기 시간 스윕",
        "name_en": "Ventilation-time sweep",
        "overrides": {
            "simulation": {"total_minutes": 2880.0},
            "physics": {"regimes": [100.0]},
            "init": {"perturbation": 0.0},
        },
    },
}
