# solver/estimation.py
"""파라미터 추정 (Yule-Walker / 가중 최소제곱 / 시그마 / 전이행렬)"""

import logging
from typing import List, Optional, Tuple, Union

import numpy as np

from config.constants import C_MAX, C_MIN, SIGMA_FLOOR, SINGULAR_RATIO
from core.errors import DegenerateSegmentError, InitializationError, ValidationError
from models.series import DecodedPath, ObservationSeries, PosteriorMatrix
from models.switching_ar import SwitchingARModel
from solver.base_solver import FitOptions, estimate_transitions, smoothed_transitions

logger = logging.getLogger(__name__)

Assignment = Union[DecodedPath, PosteriorMatrix, np.ndarray]


# === 가중 적률 ===

def _weighted_moments(x: np.ndarray, z: np.ndarray, w: np.ndarray):
    """가중 평균과 중심화 2차 적률: (n, x_bar, z_bar, Sxx, Sxz, sum w x^2)"""
    n = float(w.sum())
    x_bar = float(w @ x) / n
    z_bar = float(w @ z) / n
    dx = x - x_bar
    sxx = float(w @ (dx * dx))
    sxz = float(w @ (dx * (z - z_bar)))
    scale = float(w @ (x * x))
    return n, x_bar, z_bar, sxx, sxz, scale


def _is_singular(sxx: float, scale: float) -> bool:
    # Sxx / sum(w x^2) 는 정규방정식 E 의 조건수 역수와 같은 규모
    return sxx <= SINGULAR_RATIO * max(scale, np.finfo(float).tiny)


def _weighted_ar_fit(x: np.ndarray, z: np.ndarray, w: np.ndarray) -> Tuple[float, float]:
    n, x_bar, z_bar, sxx, sxz, scale = _weighted_moments(x, z, w)
    if n <= 0:
        raise DegenerateSegmentError("no weight assigned to the segment")
    if _is_singular(sxx, scale):
        raise DegenerateSegmentError("lagged values have zero variance; AR(1) coefficient is not identifiable")
    c_hat = sxz / sxx
    return c_hat, z_bar - c_hat * x_bar


def estimate_ar_single(segment) -> Tuple[float, float]:
    """단일 상태 구간의 AR(1)+drift 최소제곱 추정 (c_hat, mu_hat)"""
    y = segment.y if isinstance(segment, ObservationSeries) else np.asarray(segment, dtype=float)
    if y.ndim != 1 or y.size < 3:
        raise ValidationError(f"segment: at least 3 observations are required (got {y.size})")
    x, z = y[:-1], y[1:]
    return _weighted_ar_fit(x, z, np.ones_like(x))


def _posterior_array(q, n_transitions: int) -> np.ndarray:
    arr = q.q if isinstance(q, PosteriorMatrix) else np.asarray(q, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != n_transitions:
        raise ValidationError(f"posterior.q: expected {n_transitions} rows, got shape {arr.shape}")
    return arr


def weighted_ls_update(series: ObservationSeries, q, i: int,
                       min_state_weight: float = 0.0,
                       previous: Optional[Tuple[float, float]] = None) -> Tuple[float, float]:
    """사후확률 가중 2x2 정규방정식 [c mu]^T = E_i^{-1} D_i 의 해"""
    q = _posterior_array(q, series.n_transitions)
    if not 0 <= i < q.shape[1]:
        raise ValidationError(f"state index {i} outside [0, {q.shape[1]})")
    w = q[:, i]
    total = float(w.sum())
    if total <= 0 or total < min_state_weight:
        raise ValidationError(f"state {i}: total weight {total:.3g} below min_state_weight {min_state_weight}")
    x, z = series.lagged()
    try:
        return _weighted_ar_fit(x, z, w)
    except DegenerateSegmentError:
        if previous is None:
            raise
        logger.warning("state %d: singular normal equations, keeping previous parameters", i)
        return float(previous[0]), float(previous[1])


# === 할당 -> 가중치 ===

def assignment_weights(assignment: Assignment, n_states: int, n_transitions: int) -> np.ndarray:
    """하드 경로는 one-hot, 사후확률은 그대로 T x N 가중치로"""
    if isinstance(assignment, DecodedPath):
        states = assignment.states
    elif isinstance(assignment, PosteriorMatrix):
        states = None
        weights = assignment.q
    else:
        arr = np.asarray(assignment)
        if arr.ndim == 1:
            states = arr.astype(int)
        else:
            states = None
            weights = arr.astype(float)

    if states is not None:
        if states.shape[0] != n_transitions:
            raise ValidationError(
                f"assignment: length {states.shape[0]} does not match {n_transitions} transitions")
        if states.size and (states.min() < 0 or states.max() >= n_states):
            raise ValidationError(f"assignment: state indices must lie in [0, {n_states})")
        weights = np.zeros((n_transitions, n_states))
        weights[np.arange(n_transitions), states] = 1.0
    elif weights.shape != (n_transitions, n_states):
        raise ValidationError(f"assignment: expected shape ({n_transitions}, {n_states}), got {weights.shape}")
    return weights


# === M-step 구성요소 ===

def update_ar_coefficients(series: ObservationSeries, weights: np.ndarray,
                           model: SwitchingARModel, opts: FitOptions) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """상태별 (c, mu) 갱신. tie_c_by_regime 이면 같은 모드의 상태들이 c 하나를 공유

    c 에 대해 프로파일된 목적함수는 2차식이므로 [C_MIN, C_MAX] 로의 클리핑이
    제약 최적해이다. 데이터 부족 상태는 mu (비공유 시 c 도) 를 유지한다.

    Returns:
        (c, mu, starved) - starved 는 이전 값을 유지한 상태 인덱스
    """
    x, z = series.lagged()
    n_states = model.n_states
    counts = weights.sum(axis=0)
    active = (counts > 0) & (counts >= opts.min_state_weight)
    if not active.any():
        raise InitializationError(
            "every state is starved (no state reaches min_state_weight); "
            "start from a physics-based initialization (init_from_physics)")

    precision = 1.0 / model.sigma ** 2
    if opts.tie_c_by_regime:
        regimes = model.regime_of()
        groups = [np.flatnonzero(regimes == k) for k in np.unique(regimes)]
    else:
        groups = [np.array([i]) for i in range(n_states)]

    c = model.c.copy()
    mu = model.mu.copy()
    starved = set(np.flatnonzero(~active).tolist())

    for group in groups:
        free = [int(i) for i in group if active[i]]
        if not free:
            continue

        a = b = scale = 0.0
        means = {}
        for i in free:
            _, x_bar, z_bar, sxx, sxz, sq = _weighted_moments(x, z, weights[:, i])
            means[i] = (x_bar, z_bar)
            a += precision[i] * sxx
            b += precision[i] * sxz
            scale += precision[i] * sq
        for s in group:
            # 데이터 부족 상태는 mu 고정 상태로 공유 c 추정에 기여
            if active[s] or counts[s] <= 0:
                continue
            w = weights[:, s]
            a += precision[s] * float(w @ (x * x))
            b += precision[s] * float(w @ (x * (z - mu[s])))
            scale += precision[s] * float(w @ (x * x))

        if _is_singular(a, scale):
            logger.warning("states %s: singular normal equations, keeping previous parameters", free)
            starved.update(free)
            continue

        c_group = float(np.clip(b / a, C_MIN, C_MAX))
        c[group] = c_group
        for i in free:
            x_bar, z_bar = means[i]
            mu[i] = z_bar - c_group * x_bar

    if starved:
        logger.debug("starved states kept at previous values: %s", sorted(starved))
    return c, mu, sorted(starved)


def update_sigma(series: ObservationSeries, assignment: Assignment, model: SwitchingARModel,
                 tie_global: bool = True, min_weight: float = 0.0,
                 floor: float = SIGMA_FLOOR) -> np.ndarray:
    """가중 평균 제곱잔차로 상태별 sigma 추정 (tie_global 이면 전체 풀링)"""
    n_states = model.n_states
    weights = assignment_weights(assignment, n_states, series.n_transitions)
    x, z = series.lagged()
    resid = z[:, None] - x[:, None] * model.c[None, :] - model.mu[None, :]
    ssr = (weights * resid ** 2).sum(axis=0)
    counts = weights.sum(axis=0)

    if tie_global:
        total = counts.sum()
        if total <= 0:
            return model.sigma.copy()
        pooled = max(float(np.sqrt(ssr.sum() / total)), floor)
        return np.full(n_states, pooled)

    sigma = model.sigma.copy()
    update = (counts > 0) & (counts >= min_weight)
    sigma[update] = np.sqrt(ssr[update] / counts[update])
    return np.maximum(sigma, floor)


def transition_counts(states, n_states: int) -> np.ndarray:
    """경로의 i -> j 전이 횟수"""
    states = np.asarray(states, dtype=int)
    counts = np.zeros((n_states, n_states))
    if states.size > 1:
        np.add.at(counts, (states[:-1], states[1:]), 1.0)
    return counts


def update_transitions(path, n_states: int, alpha: float = 0.0) -> np.ndarray:
    """Lambda(i,j) = (count(i->j) + alpha) / (sum_j count(i->j) + N alpha)"""
    states = path.states if isinstance(path, DecodedPath) else np.asarray(path, dtype=int)
    if states.size < 2:
        raise ValidationError(f"path: at least 2 states are required (got {states.size})")
    if alpha < 0:
        raise ValidationError(f"fit.transition_smoothing: must be >= 0 (got {alpha})")
    if states.min() < 0 or states.max() >= n_states:
        raise ValidationError(f"path.states: indices must lie in [0, {n_states})")
    return smoothed_transitions(transition_counts(states, n_states), alpha)


def m_step(series: ObservationSeries, weights: np.ndarray, model: SwitchingARModel,
           opts: FitOptions, expected_transitions: np.ndarray) -> Tuple[SwitchingARModel, List[int]]:
    """(c, mu) -> sigma -> Lambda 순 좌표 상승. pi 는 고정

    factor_transitions 이면 Lambda 는 인원/모드 주변 카운트로 각각 평활한
    두 인자의 곱이며, 목적함수의 사전항도 같은 인자 위에서 계산된다.
    """
    c, mu, starved = update_ar_coefficients(series, weights, model, opts)
    interim = model.replace(c=c, mu=mu)
    sigma = update_sigma(series, weights, interim,
                         tie_global=opts.tie_sigma_global,
                         min_weight=opts.min_state_weight)
    trans = estimate_transitions(expected_transitions, model, opts)
    return interim.replace(sigma=sigma, trans=trans), starved
