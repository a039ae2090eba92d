# solver/msar_solver.py
"""스위칭 AR 모델 추론 (Viterbi, forward-backward, 경로 로그우도)"""

from typing import Tuple

import numpy as np
from scipy.stats import norm

from core.errors import ValidationError
from models.series import DecodedPath, ObservationSeries, PosteriorMatrix
from models.switching_ar import SwitchingARModel
from solver.base_solver import BaseDecoder, ForwardBackwardResult


class SwitchingARDecoder(BaseDecoder):
    """조건부 AR 방출 y_t ~ N(c(i) y_{t-1} + mu(i), sigma(i)^2). y_0 은 조건 상수"""

    def __init__(self, model: SwitchingARModel):
        super().__init__(model.log_trans, model.log_init)
        self.model = model

    def log_emissions(self, series: ObservationSeries) -> np.ndarray:
        y_prev, y_cur = series.lagged()
        m = self.model
        mean = y_prev[:, None] * m.c[None, :] + m.mu[None, :]
        return norm.logpdf(y_cur[:, None], loc=mean, scale=m.sigma[None, :])

    def decode(self, series: ObservationSeries) -> Tuple[DecodedPath, float]:
        states, score = self.viterbi(series)
        return DecodedPath.from_states(states, self.model.space), score


def emission_logdensity(model: SwitchingARModel, i: int, y_prev: float, y_cur: float) -> float:
    """상태 i 의 조건부 가우시안 로그 밀도"""
    if not 0 <= i < model.n_states:
        raise ValidationError(f"state index {i} outside [0, {model.n_states})")
    mean = model.c[i] * y_prev + model.mu[i]
    return float(norm.logpdf(y_cur, loc=mean, scale=model.sigma[i]))


def viterbi(model: SwitchingARModel, series: ObservationSeries) -> Tuple[DecodedPath, float]:
    """최대 확률 상태열 S_1..S_T 와 로그 확률"""
    return SwitchingARDecoder(model).decode(series)


def forward_backward_full(model: SwitchingARModel, series: ObservationSeries) -> ForwardBackwardResult:
    """사후확률, 증거, 기대 전이 카운트"""
    return SwitchingARDecoder(model).forward_backward(series)


def forward_backward(model: SwitchingARModel, series: ObservationSeries) -> Tuple[PosteriorMatrix, float]:
    """평활 사후확률 q_t(i) 와 log P(Y | theta)"""
    result = forward_backward_full(model, series)
    return PosteriorMatrix(result.posteriors), result.log_evidence


def path_loglikelihood(model: SwitchingARModel, series: ObservationSeries, path) -> float:
    """주어진 경로의 완전 데이터 로그우도 (log pi(S_1) 포함)"""
    states = path.states if isinstance(path, DecodedPath) else np.asarray(path, dtype=int)
    if states.shape[0] != series.n_transitions:
        raise ValidationError(
            f"path.states: length {states.shape[0]} does not match series transitions {series.n_transitions}")
    return SwitchingARDecoder(model).path_score(series, states)


def decode_with_posteriors(model: SwitchingARModel, series: ObservationSeries) -> Tuple[DecodedPath, float, float]:
    """Viterbi 경로에 각 스텝 최대 사후확률을 붙여 반환 (경로, 경로 로그확률, 증거)"""
    decoder = SwitchingARDecoder(model)
    path, score = decoder.decode(series)
    fb = decoder.forward_backward(series)
    return path.with_posterior(fb.posteriors.max(axis=1)), score, fb.log_evidence
