# solver/base_solver.py
"""디코더 베이스 클래스 (Viterbi / forward-backward 공통 코어)"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from scipy.special import logsumexp

from config.constants import (
    DEFAULT_MAX_ITERS, DEFAULT_TOL, DEFAULT_MIN_STATE_WEIGHT,
    DEFAULT_TRANSITION_SMOOTHING, DEFAULT_WARM_START_STEPS,
)
from core.errors import ValidationError, require


@dataclass(frozen=True)
class FitOptions:
    """피팅 설정"""
    max_iters: int = DEFAULT_MAX_ITERS
    tol: float = DEFAULT_TOL
    tie_c_by_regime: bool = True
    tie_sigma_global: bool = True
    min_state_weight: float = DEFAULT_MIN_STATE_WEIGHT
    transition_smoothing: float = DEFAULT_TRANSITION_SMOOTHING  # Dirichlet 의사 카운트 alpha
    factor_transitions: bool = True  # Lambda = A_occ (x) A_reg
    start_search: bool = True
    warm_start_steps: int = DEFAULT_WARM_START_STEPS

    def __post_init__(self):
        require(int(self.max_iters) == self.max_iters and self.max_iters >= 1,
                "fit.max_iters", f"must be an integer >= 1 (got {self.max_iters})")
        require(math.isfinite(self.tol) and self.tol > 0, "fit.tol", f"must be > 0 (got {self.tol})")
        require(math.isfinite(self.transition_smoothing) and self.transition_smoothing >= 0,
                "fit.transition_smoothing", f"must be >= 0 (got {self.transition_smoothing})")
        require(math.isfinite(self.min_state_weight) and self.min_state_weight >= 0,
                "fit.min_state_weight", f"must be >= 0 (got {self.min_state_weight})")
        require(int(self.warm_start_steps) == self.warm_start_steps and self.warm_start_steps >= 0,
                "fit.warm_start_steps", f"must be an integer >= 0 (got {self.warm_start_steps})")

    @classmethod
    def from_dict(cls, data: dict) -> "FitOptions":
        """딕셔너리에서 FitOptions 생성"""
        defaults = cls.__dataclass_fields__
        return cls(
            max_iters=int(data.get("max_iters", defaults["max_iters"].default)),
            tol=float(data.get("tol", defaults["tol"].default)),
            tie_c_by_regime=bool(data.get("tie_c_by_regime", True)),
            tie_sigma_global=bool(data.get("tie_sigma_global", True)),
            min_state_weight=float(data.get("min_state_weight", defaults["min_state_weight"].default)),
            transition_smoothing=float(data.get("transition_smoothing",
                                                defaults["transition_smoothing"].default)),
            factor_transitions=bool(data.get("factor_transitions", True)),
            start_search=bool(data.get("start_search", True)),
            warm_start_steps=int(data.get("warm_start_steps", defaults["warm_start_steps"].default)),
        )

    def to_dict(self) -> dict:
        return {
            "max_iters": int(self.max_iters),
            "tol": float(self.tol),
            "tie_c_by_regime": bool(self.tie_c_by_regime),
            "tie_sigma_global": bool(self.tie_sigma_global),
            "min_state_weight": float(self.min_state_weight),
            "transition_smoothing": float(self.transition_smoothing),
            "factor_transitions": bool(self.factor_transitions),
            "start_search": bool(self.start_search),
            "warm_start_steps": int(self.warm_start_steps),
        }


@dataclass
class FitReport:
    """피팅 결과

    loglik_trace 는 반복별 벌점 목적함수 (경로 로그우도 + 전이 사전항),
    complete_loglik_trace 는 같은 경로의 사전항 없는 완전 데이터 로그우도.
    """
    iterations: int
    loglik_trace: List[float]
    converged: bool
    final_model: Any
    final_path: Any
    starved_states: Tuple[int, ...] = ()
    message: str = ""
    complete_loglik_trace: List[float] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        """딕셔너리로 변환 (JSON 리포트용, 모델 본문 제외)"""
        result = {
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "loglik_trace": [float(v) for v in self.loglik_trace],
            "complete_loglik_trace": [float(v) for v in self.complete_loglik_trace],
            "starved_states": [int(i) for i in self.starved_states],
            "message": self.message,
        }
        model = self.final_model
        if hasattr(model, "c"):
            result["c"] = [float(v) for v in model.c]
            result["mu"] = [float(v) for v in model.mu]
            result["sigma"] = [float(v) for v in model.sigma]
        return result

    def summary(self) -> str:
        """텍스트 요약"""
        lines = [
            f"iterations: {self.iterations}",
            f"converged: {self.converged}",
            f"final_objective: {self.loglik_trace[-1]:.6f}" if self.loglik_trace else "final_objective: n/a",
        ]
        if self.complete_loglik_trace:
            lines.append(f"final_complete_loglik: {self.complete_loglik_trace[-1]:.6f}")
        lines.append(f"starved_states: {list(self.starved_states)}")
        if self.message:
            lines.append(f"message: {self.message}")
        return "\n".join(lines)


@dataclass
class ForwardBackwardResult:
    """forward-backward 결과"""
    posteriors: np.ndarray  # T x N
    log_evidence: float
    expected_transitions: np.ndarray  # N x N, sum_t P(S_{t-1}=i, S_t=j | Y)


class BaseDecoder:
    """로그 방출 행렬 위의 HMM 추론 공통 코어"""

    def __init__(self, log_trans: np.ndarray, log_init: np.ndarray):
        self.log_trans = np.asarray(log_trans, dtype=float)
        self.log_init = np.asarray(log_init, dtype=float)
        self.n_states = self.log_init.shape[0]

    def log_emissions(self, series) -> np.ndarray:
        """T x N 로그 방출 밀도 (하위 클래스 구현)"""
        raise NotImplementedError

    def _check_series(self, series):
        if len(series) < 2:
            raise ValidationError("series.y: at least 2 observations are required for decoding")

    def viterbi(self, series) -> Tuple[np.ndarray, float]:
        """최대 확률 상태열과 그 로그 확률. 동률이면 낮은 상태 인덱스 선택"""
        self._check_series(series)
        log_b = self.log_emissions(series)
        n_steps, n_states = log_b.shape
        cols = np.arange(n_states)

        back = np.zeros((n_steps, n_states), dtype=int)
        delta = self.log_init + log_b[0]
        for t in range(1, n_steps):
            scores = delta[:, None] + self.log_trans
            best = np.argmax(scores, axis=0)  # 첫 번째 최대값 = 최저 인덱스
            back[t] = best
            delta = scores[best, cols] + log_b[t]

        states = np.empty(n_steps, dtype=int)
        states[-1] = int(np.argmax(delta))
        for t in range(n_steps - 1, 0, -1):
            states[t - 1] = back[t, states[t]]
        return states, float(delta[states[-1]])

    def forward_backward(self, series) -> ForwardBackwardResult:
        """로그 영역 forward-backward (언더플로 없음)"""
        self._check_series(series)
        log_b = self.log_emissions(series)
        n_steps, n_states = log_b.shape

        log_alpha = np.empty((n_steps, n_states))
        log_alpha[0] = self.log_init + log_b[0]
        for t in range(1, n_steps):
            log_alpha[t] = logsumexp(log_alpha[t - 1][:, None] + self.log_trans, axis=0) + log_b[t]

        log_beta = np.zeros((n_steps, n_states))
        for t in range(n_steps - 2, -1, -1):
            log_beta[t] = logsumexp(self.log_trans + (log_b[t + 1] + log_beta[t + 1])[None, :], axis=1)

        log_evidence = float(logsumexp(log_alpha[-1]))

        log_gamma = log_alpha + log_beta
        log_gamma -= logsumexp(log_gamma, axis=1, keepdims=True)
        posteriors = np.exp(log_gamma)
        posteriors /= posteriors.sum(axis=1, keepdims=True)

        expected = np.zeros((n_states, n_states))
        for t in range(1, n_steps):
            log_xi = (log_alpha[t - 1][:, None] + self.log_trans
                      + (log_b[t] + log_beta[t])[None, :] - log_evidence)
            expected += np.exp(log_xi)

        return ForwardBackwardResult(
            posteriors=posteriors,
            log_evidence=log_evidence,
            expected_transitions=expected,
        )

    def path_score(self, series, states) -> float:
        """완전 데이터 로그우도: log pi(S_1) + sum 방출 + sum 전이"""
        states = np.asarray(states, dtype=int)
        log_b = self.log_emissions(series)
        if states.shape[0] != log_b.shape[0]:
            raise ValidationError(
                f"path.states: length {states.shape[0]} does not match {log_b.shape[0]} transitions")
        if states.size and (states.min() < 0 or states.max() >= self.n_states):
            raise ValidationError(f"path.states: indices must lie in [0, {self.n_states})")
        score = self.log_init[states[0]] + log_b[np.arange(states.size), states].sum()
        if states.size > 1:
            score += self.log_trans[states[:-1], states[1:]].sum()
        return float(score)


def transition_prior(trans: np.ndarray, alpha: float) -> float:
    """Dirichlet 의사 카운트 항 alpha * sum(log Lambda). alpha = 0 이면 0"""
    if alpha <= 0:
        return 0.0
    with np.errstate(divide="ignore"):
        return float(alpha * np.log(trans).sum())


def smoothed_transitions(counts: np.ndarray, alpha: float) -> np.ndarray:
    """(count + alpha) / (row + N alpha). 카운트 없는 행은 균등"""
    counts = np.asarray(counts, dtype=float)
    n_states = counts.shape[0]
    smoothed = counts + alpha
    rows = smoothed.sum(axis=1, keepdims=True)
    uniform = np.full((1, n_states), 1.0 / n_states)
    with np.errstate(invalid="ignore", divide="ignore"):
        trans = np.where(rows > 0, smoothed / np.where(rows > 0, rows, 1.0), uniform)
    return trans / trans.sum(axis=1, keepdims=True)


def _factor_shape(model) -> Optional[Tuple[int, int]]:
    space = getattr(model, "space", None)
    if space is None or space.n_regimes < 2:
        return None
    return space.max_occupancy + 1, space.n_regimes


def uses_factored_transitions(model, opts: FitOptions) -> bool:
    """인원 x 환기 모드 곱 구조 전이행렬을 쓰는지 (모드 1개면 전체 행렬과 같음)"""
    return opts.factor_transitions and _factor_shape(model) is not None


def transition_factors(trans: np.ndarray, n_levels: int, n_regimes: int) -> Tuple[np.ndarray, np.ndarray]:
    """Lambda 의 주변 인자 (A_occ, A_reg). Lambda = A_occ (x) A_reg 이면 정확히 복원"""
    blocks = np.asarray(trans, dtype=float).reshape(n_levels, n_regimes, n_levels, n_regimes)
    occ = blocks.sum(axis=3).mean(axis=1)
    reg = blocks.sum(axis=2).mean(axis=0)
    return occ, reg


def factored_transitions(counts: np.ndarray, n_levels: int, n_regimes: int, alpha: float) -> np.ndarray:
    """인원/모드 주변 카운트를 각각 평활한 뒤 크로네커 곱 (상태 인덱스 = n K + k)"""
    blocks = np.asarray(counts, dtype=float).reshape(n_levels, n_regimes, n_levels, n_regimes)
    occ = smoothed_transitions(blocks.sum(axis=(1, 3)), alpha)
    reg = smoothed_transitions(blocks.sum(axis=(0, 2)), alpha)
    return np.kron(occ, reg)


def estimate_transitions(counts: np.ndarray, model, opts: FitOptions) -> np.ndarray:
    """전이 카운트 (하드 또는 기대값) -> Lambda"""
    if uses_factored_transitions(model, opts):
        return factored_transitions(counts, *_factor_shape(model), opts.transition_smoothing)
    return smoothed_transitions(counts, opts.transition_smoothing)


def objective_prior(model, opts: FitOptions) -> float:
    """목적함수의 Dirichlet 항. 곱 구조면 alpha (sum log A_occ + sum log A_reg)"""
    alpha = opts.transition_smoothing
    if not uses_factored_transitions(model, opts):
        return transition_prior(model.trans, alpha)
    occ, reg = transition_factors(model.trans, *_factor_shape(model))
    return transition_prior(occ, alpha) + transition_prior(reg, alpha)


def project_transitions(model, opts: FitOptions):
    """Lambda 를 주변 인자의 크로네커 곱으로 교체 (곱 구조가 아니면 그대로)"""
    if not uses_factored_transitions(model, opts):
        return model
    occ, reg = transition_factors(model.trans, *_factor_shape(model))
    trans = np.kron(occ, reg)
    return model.replace(trans=trans / trans.sum(axis=1, keepdims=True))


def relative_change(new: float, old: float) -> float:
    """상대 개선량 (분모 하한 1)"""
    return (new - old) / max(abs(old), 1.0)
