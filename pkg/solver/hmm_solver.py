# solver/hmm_solver.py
"""단순 가우시안 HMM 비교 기준 (AR 항 없음, 상태 = 재실 인원)"""

import logging
from typing import List, Tuple

import numpy as np
from scipy.stats import norm

from config.constants import DEFAULT_SELF_STAY, SIGMA_FLOOR
from core.errors import InitializationError, ValidationError
from models.series import DecodedPath, ObservationSeries
from models.simple_hmm import SimpleHMM
from solver.base_solver import BaseDecoder, FitOptions, smoothed_transitions
from solver.em_solver import run_hard_em
from solver.estimation import transition_counts

logger = logging.getLogger(__name__)


class GaussianHMMDecoder(BaseDecoder):
    """무기억 방출 y_t ~ N(m(i), s(i)^2). 스위칭 AR 과 같은 t = 1..T 정렬"""

    def __init__(self, model: SimpleHMM):
        super().__init__(model.log_trans, model.log_init)
        self.model = model

    def log_emissions(self, series: ObservationSeries) -> np.ndarray:
        y_cur = series.y[1:]
        return norm.logpdf(y_cur[:, None], loc=self.model.means[None, :], scale=self.model.sds[None, :])


INIT_METHODS = ("span", "quantile")


def _quantile_means(y: np.ndarray, n_states: int) -> np.ndarray:
    """등간격 분위수 (2k+1)/(2N). 범위/(2N) 이내로 겹친 분위수는 버리고 빈 상태는 위쪽에 배치"""
    levels = (2 * np.arange(n_states) + 1) / (2 * n_states)
    quantiles = np.quantile(y, levels)
    gap = 0.5 * float(np.ptp(y)) / n_states
    kept = [float(quantiles[0])]
    for value in quantiles[1:]:
        if value - kept[-1] > gap:
            kept.append(float(value))
    missing = n_states - len(kept)
    if missing:
        step = float(np.median(np.diff(kept))) if len(kept) > 1 else max(gap, float(np.std(y)), SIGMA_FLOOR)
        kept.extend(kept[-1] + step * np.arange(1, missing + 1))
        logger.debug("quantile init: %d collapsed quantiles moved above the top level", missing)
    return np.array(kept)


def initial_simple_hmm(series: ObservationSeries, n_states: int,
                       self_stay: float = DEFAULT_SELF_STAY, method: str = "span") -> SimpleHMM:
    """초기 방출 평균과 sd (전체 sd / N)

    span: min(y) ~ max(y) 등간격 (N = 1 이면 평균), quantile: 등간격 분위수.
    """
    if method not in INIT_METHODS:
        raise ValidationError(f"init_method: must be one of {list(INIT_METHODS)} (got {method!r})")
    y = series.y[1:]
    if method == "quantile":
        means = _quantile_means(y, n_states)
    elif n_states == 1:
        means = np.array([float(np.mean(y))])
    else:
        means = np.linspace(float(y.min()), float(y.max()), n_states)
    sds = np.full(n_states, max(float(np.std(y)) / n_states, SIGMA_FLOOR))
    if n_states == 1:
        trans = np.ones((1, 1))
    else:
        trans = np.full((n_states, n_states), (1.0 - self_stay) / (n_states - 1))
        np.fill_diagonal(trans, self_stay)
    return SimpleHMM(means=means, sds=sds, trans=trans, init=np.full(n_states, 1.0 / n_states))


class SimpleHMMSolver:
    """Viterbi 기반 EM 으로 가우시안 HMM 피팅"""

    def __init__(self, options: FitOptions = None, init_method: str = "span"):
        self.options = options or FitOptions()
        self.init_method = init_method

    def _update(self, series: ObservationSeries):
        y = series.y[1:]
        opts = self.options

        def update(states: np.ndarray, model: SimpleHMM) -> Tuple[SimpleHMM, List[int]]:
            n_states = model.n_states
            onehot = np.zeros((states.size, n_states))
            onehot[np.arange(states.size), states] = 1.0
            counts = onehot.sum(axis=0)
            active = (counts > 0) & (counts >= opts.min_state_weight)
            if not active.any():
                raise InitializationError("every baseline state is starved (no state reaches min_state_weight)")

            means = model.means.copy()
            sds = model.sds.copy()
            means[active] = (onehot[:, active].T @ y) / counts[active]
            sq = (onehot * (y[:, None] - means[None, :]) ** 2).sum(axis=0)
            if opts.tie_sigma_global:
                sds[:] = np.sqrt(sq.sum() / counts.sum())
            else:
                sds[active] = np.sqrt(sq[active] / counts[active])
            sds = np.maximum(sds, SIGMA_FLOOR)

            trans = smoothed_transitions(transition_counts(states, n_states), opts.transition_smoothing)
            new_model = SimpleHMM(means=means, sds=sds, trans=trans, init=model.init)
            return new_model, np.flatnonzero(~active).tolist()

        return update

    def fit(self, series: ObservationSeries, n_states: int) -> SimpleHMM:
        if n_states < 1:
            raise ValidationError(f"n_states: must be >= 1 (got {n_states})")
        if len(series) < 2:
            raise ValidationError("series.y: at least 2 observations are required for fitting")
        model0 = initial_simple_hmm(series, n_states, method=self.init_method)
        model, _, iterations, _, _, converged, starved = run_hard_em(
            model0, series, self.options, GaussianHMMDecoder, self._update(series))
        if starved:
            logger.debug("baseline states kept at initial values: %s", starved)
        logger.info("simple HMM finished: %d iterations, converged=%s", iterations, converged)
        return model.sorted_by_mean()


def fit_simple_hmm(series: ObservationSeries, n_states: int, opts: FitOptions = None,
                   init_method: str = "span") -> SimpleHMM:
    """단순 HMM 피팅 (상태는 방출 평균 오름차순 정렬)"""
    return SimpleHMMSolver(opts, init_method).fit(series, n_states)


def decode_simple_hmm(model: SimpleHMM, series: ObservationSeries) -> DecodedPath:
    """Viterbi 경로. 상태 인덱스를 재실 인원으로 해석"""
    states, _ = GaussianHMMDecoder(model).viterbi(series)
    return DecodedPath.from_states(states, n_states=model.n_states)
