# solver/em_solver.py
"""EM 학습 - Viterbi 경로 기반 (segmental k-means) 과 Baum-Welch"""

import itertools
import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from config.constants import START_SEARCH_POINTS, START_SEARCH_RANGE
from core.errors import ValidationError
from models.series import DecodedPath, ObservationSeries
from models.switching_ar import SwitchingARModel, implied_ventilation_times
from solver.base_solver import (
    FitOptions, FitReport, objective_prior, project_transitions, relative_change,
)
from solver.estimation import assignment_weights, m_step, transition_counts
from solver.msar_solver import SwitchingARDecoder

logger = logging.getLogger(__name__)


def run_hard_em(model0, series: ObservationSeries, opts: FitOptions,
                make_decoder: Callable, update: Callable
                ) -> Tuple[object, np.ndarray, int, List[float], List[float], bool, List[int]]:
    """하드 할당 EM 루프 (스위칭 AR 과 단순 HMM 공용)

    목적함수 = 경로 로그우도 + Dirichlet 사전항. 각 M-step 이 좌표별
    정확 최대화이므로 궤적은 단조 비감소.

    Args:
        make_decoder: model -> BaseDecoder
        update: (states, model) -> (new_model, starved)

    Returns:
        (model, states, iterations, objective trace, complete-data trace, converged, starved)
    """
    model = model0
    trace: List[float] = []
    complete: List[float] = []
    prev_states: Optional[np.ndarray] = None
    prev_obj: Optional[float] = None
    converged = False
    starved: List[int] = []
    iteration = 0

    for iteration in range(1, opts.max_iters + 1):
        states, score = make_decoder(model).viterbi(series)
        if prev_obj is None:
            prev_obj = score + objective_prior(model, opts)

        model, starved = update(states, model)
        path_ll = make_decoder(model).path_score(series, states)
        obj = path_ll + objective_prior(model, opts)
        trace.append(obj)
        complete.append(path_ll)
        logger.debug("iteration %d: objective %.6f (previous %.6f)", iteration, obj, prev_obj)

        same_path = prev_states is not None and np.array_equal(states, prev_states)
        if same_path or relative_change(obj, prev_obj) < opts.tol:
            converged = True
            break
        prev_obj = obj
        prev_states = states

    final_states, _ = make_decoder(model).viterbi(series)
    return model, final_states, iteration, trace, complete, converged, starved


# === 시작점 / 라벨 정리 ===

def _with_ventilation_times(model: SwitchingARModel, taus: np.ndarray) -> SwitchingARModel:
    """모드별 tau 로부터 c = exp(-dt/tau), mu = (1-c) tau r n 재계산. sigma, Lambda, pi 유지"""
    physics = model.physics
    tau = np.asarray(taus, dtype=float)[model.space.regime_array()]
    c = np.exp(-physics.dt / tau)
    mu = (1.0 - c) * tau * physics.person_rate * model.space.occupancy_array()
    return model.replace(c=c, mu=mu)


def search_start(model0: SwitchingARModel, series: ObservationSeries,
                 opts: FitOptions) -> SwitchingARModel:
    """모드별 tau 를 기하 격자로 흔든 후보 중 Viterbi 로그확률이 가장 큰 시작 모델

    격자는 START_SEARCH_RANGE 구간의 START_SEARCH_POINTS 점이고 모드 간 모든
    조합을 본다. 물리 설정이 없는 모델은 그대로 반환.
    """
    if not opts.start_search or model0.space is None or model0.physics is None:
        return model0
    taus0 = implied_ventilation_times(model0, model0.physics.dt)
    factors = np.geomspace(*START_SEARCH_RANGE, START_SEARCH_POINTS)
    center = START_SEARCH_POINTS // 2

    best = model0
    _, best_score = SwitchingARDecoder(model0).viterbi(series)
    for combo in itertools.product(range(factors.size), repeat=taus0.size):
        if all(j == center for j in combo):
            continue
        candidate = _with_ventilation_times(model0, taus0 * factors[list(combo)])
        _, score = SwitchingARDecoder(candidate).viterbi(series)
        if score > best_score:
            best, best_score = candidate, score

    if best is not model0:
        logger.info("start search: ventilation times %s -> %s",
                    np.round(taus0, 2).tolist(), np.round(implied_ventilation_times(best), 2).tolist())
    return best


def canonical_regime_order(model: SwitchingARModel,
                           states: Optional[np.ndarray] = None) -> Tuple[SwitchingARModel, Optional[np.ndarray]]:
    """환기 모드 라벨을 tau_hat 오름차순으로 재배치 (c, mu, sigma, pi, Lambda, 경로, physics.regimes)"""
    space = model.space
    if space is None or space.n_regimes < 2:
        return model, states
    n_regimes = space.n_regimes
    regimes = space.regime_array()
    c_by_regime = np.array([model.c[regimes == k].mean() for k in range(n_regimes)])
    order = np.argsort(c_by_regime, kind="stable")
    if np.array_equal(order, np.arange(n_regimes)):
        return model, states

    rank = np.empty(n_regimes, dtype=int)
    rank[order] = np.arange(n_regimes)
    new_of_old = space.occupancy_array() * n_regimes + rank[regimes]
    old_of_new = np.argsort(new_of_old)

    physics = model.physics
    if physics is not None:
        physics = physics.with_regimes([physics.regimes[k] for k in order])
    reordered = model.replace(
        c=model.c[old_of_new],
        mu=model.mu[old_of_new],
        sigma=model.sigma[old_of_new],
        trans=model.trans[np.ix_(old_of_new, old_of_new)],
        init=model.init[old_of_new],
        physics=physics,
    )
    logger.debug("regime labels reordered by ventilation time: %s", order.tolist())
    if states is not None:
        states = new_of_old[np.asarray(states, dtype=int)]
    return reordered, states


class EMViterbiSolver:
    """스위칭 AR 모델의 Viterbi 기반 EM 솔버

    시작점 탐색 -> Baum-Welch 워밍업 -> 하드 EM -> 모드 라벨 정렬 순.
    """

    def __init__(self, options: FitOptions = None):
        self.options = options or FitOptions()

    def _check(self, model0: SwitchingARModel, series: ObservationSeries):
        if len(series) < 2:
            raise ValidationError("series.y: at least 2 observations are required for fitting")
        n_states = model0.n_states
        if series.n_transitions < 3 * n_states:
            logger.warning("series has %d transitions for %d states; estimates may be poorly determined",
                           series.n_transitions, n_states)

    def _update(self, series: ObservationSeries):
        def update(states: np.ndarray, model: SwitchingARModel):
            n_states = model.n_states
            weights = assignment_weights(states, n_states, series.n_transitions)
            return m_step(series, weights, model, self.options, transition_counts(states, n_states))

        return update

    def _start(self, model0: SwitchingARModel, series: ObservationSeries) -> SwitchingARModel:
        opts = self.options
        start = search_start(project_transitions(model0, opts), series, opts)
        if opts.warm_start_steps:
            start, _ = BaumWelchSolver(opts).run(start, series, opts.warm_start_steps)
        return start

    def fit(self, model0: SwitchingARModel, series: ObservationSeries) -> FitReport:
        """E(경로) / M(파라미터) 교대 반복"""
        self._check(model0, series)
        model, states, iterations, trace, complete, converged, starved = run_hard_em(
            self._start(model0, series), series, self.options, SwitchingARDecoder, self._update(series))
        model, states = canonical_regime_order(model, states)

        message = "" if converged else f"not converged after {iterations} iterations"
        if starved:
            message = (message + "; " if message else "") + f"states kept at initial values: {starved}"
        logger.info("EM-Viterbi finished: %d iterations, converged=%s, objective=%.4f",
                    iterations, converged, trace[-1])
        return FitReport(
            iterations=iterations,
            loglik_trace=trace,
            converged=converged,
            final_model=model,
            final_path=DecodedPath.from_states(states, model.space),
            starved_states=tuple(starved),
            message=message,
            complete_loglik_trace=complete,
        )


class BaumWelchSolver:
    """사후확률 가중 (soft) EM 솔버. pi 는 고정"""

    def __init__(self, options: FitOptions = None):
        self.options = options or FitOptions()

    def objective(self, model: SwitchingARModel, log_evidence: float) -> float:
        return log_evidence + objective_prior(model, self.options)

    def step(self, model: SwitchingARModel, series: ObservationSeries) -> Tuple[SwitchingARModel, float, List[int]]:
        """E-step 1회 + M-step 1회

        Returns:
            (새 모델, 현재 모델의 벌점 증거, 데이터 부족 상태)
        """
        fb = SwitchingARDecoder(model).forward_backward(series)
        new_model, starved = m_step(series, fb.posteriors, model, self.options, fb.expected_transitions)
        return new_model, self.objective(model, fb.log_evidence), starved

    def run(self, model0: SwitchingARModel, series: ObservationSeries,
            n_steps: int) -> Tuple[SwitchingARModel, List[float]]:
        """주어진 모델에서 n_steps 회 반복 (시작점 탐색, 라벨 정렬 없음)"""
        if n_steps < 1:
            raise ValidationError(f"n_steps: must be >= 1 (got {n_steps})")
        model = model0
        trace: List[float] = []
        for step in range(n_steps):
            model, obj, _ = self.step(model, series)
            trace.append(obj)
            logger.debug("Baum-Welch step %d: objective %.6f", step + 1, obj)
        fb = SwitchingARDecoder(model).forward_backward(series)
        trace.append(self.objective(model, fb.log_evidence))
        return model, trace

    def fit(self, model0: SwitchingARModel, series: ObservationSeries,
            n_steps: int) -> Tuple[SwitchingARModel, List[float]]:
        """시작점 탐색 후 n_steps 회 반복. trace 는 시작 모델 포함 n_steps + 1 개"""
        if n_steps < 1:
            raise ValidationError(f"n_steps: must be >= 1 (got {n_steps})")
        start = search_start(project_transitions(model0, self.options), series, self.options)
        model, trace = self.run(start, series, n_steps)
        model, _ = canonical_regime_order(model)
        return model, trace


def fit_em_viterbi(model0: SwitchingARModel, series: ObservationSeries,
                   opts: FitOptions = None) -> FitReport:
    """Viterbi 기반 EM 피팅"""
    return EMViterbiSolver(opts).fit(model0, series)


def fit_baum_welch_step(model: SwitchingARModel, series: ObservationSeries,
                        opts: FitOptions = None) -> SwitchingARModel:
    """Baum-Welch 1 스텝"""
    new_model, _, _ = BaumWelchSolver(opts).step(model, series)
    return new_model


def fit_baum_welch(model0: SwitchingARModel, series: ObservationSeries,
                   opts: FitOptions = None, n_steps: int = 20) -> Tuple[SwitchingARModel, List[float]]:
    """Baum-Welch 다중 스텝 (벌점 증거 궤적 포함)"""
    return BaumWelchSolver(opts).fit(model0, series, n_steps)
