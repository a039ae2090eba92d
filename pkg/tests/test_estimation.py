# tests/test_estimation.py
"""추정 (회귀, 시그마, 전이행렬) 과 EM 드라이버 테스트"""

import numpy as np
import pytest

from config.constants import SIGMA_FLOOR
from core.errors import DegenerateSegmentError, InitializationError, ValidationError
from models.physics import PhysicsConfig
from models.schedule import Schedule
from models.series import DecodedPath, ObservationSeries, PosteriorMatrix
from models.state_space import build_state_space
from models.switching_ar import SwitchingARModel, implied_ventilation_times, init_from_physics
from services.evaluation_service import score
from services.simulation_service import SimulationService
from solver.base_solver import (
    FitOptions, estimate_transitions, factored_transitions, objective_prior,
    smoothed_transitions, transition_factors,
)
from solver.em_solver import (
    canonical_regime_order, fit_baum_welch, fit_baum_welch_step, fit_em_viterbi, search_start,
)
from solver.estimation import (
    estimate_ar_single, update_sigma, update_transitions, weighted_ls_update,
)
from solver.msar_solver import SwitchingARDecoder, forward_backward

SLACK = 1e-9


def _noisy_ar(seed: int, n: int = 200, c: float = 0.9, mu: float = 4.0, sd: float = 1.0) -> np.ndarray:
    rng = np.random.default_rng(seed)
    y = np.empty(n)
    y[0] = 5.0
    for t in range(1, n):
        y[t] = c * y[t - 1] + mu + rng.normal(0.0, sd)
    return y


# === 단일 구간 회귀 ===

def test_estimate_ar_single_noise_free():
    y = [100.0]
    for _ in range(20):
        y.append(0.95 * y[-1] + 7.0)
    c_hat, mu_hat = estimate_ar_single(np.array(y))
    assert c_hat == pytest.approx(0.95, abs=1e-10)
    assert mu_hat == pytest.approx(7.0, abs=1e-8)


def test_estimate_ar_single_errors():
    with pytest.raises(DegenerateSegmentError):
        estimate_ar_single(np.full(10, 42.0))
    with pytest.raises(ValidationError):
        estimate_ar_single(np.array([1.0, 2.0]))


def test_estimate_ar_single_white_noise():
    rng = np.random.default_rng(21)
    y = 10.0 + rng.normal(0.0, 2.0, 5000)
    c_hat, mu_hat = estimate_ar_single(y)
    assert abs(c_hat) < 0.06
    assert mu_hat == pytest.approx(10.0, abs=0.7)


def test_unit_weights_reduce_to_ordinary_least_squares():
    y = _noisy_ar(1)
    series = ObservationSeries.from_values(y)
    q = np.ones((series.n_transitions, 1))
    c_w, mu_w = weighted_ls_update(series, PosteriorMatrix(q), 0)
    c_o, mu_o = estimate_ar_single(y)
    assert abs(c_w - c_o) <= 1e-12
    assert abs(mu_w - mu_o) <= 1e-12 * max(1.0, abs(mu_o))


def test_indicator_weights_match_segment_fit():
    y = np.concatenate([_noisy_ar(2, n=120), _noisy_ar(3, n=100, c=0.8, mu=10.0)])
    series = ObservationSeries.from_values(y)
    inside = np.zeros(series.n_transitions)
    inside[30:80] = 1.0
    q = PosteriorMatrix(np.column_stack([inside, 1.0 - inside]))
    c_w, mu_w = weighted_ls_update(series, q, 0)
    c_s, mu_s = estimate_ar_single(y[30:81])
    assert c_w == pytest.approx(c_s, abs=1e-9)
    assert mu_w == pytest.approx(mu_s, abs=1e-7)


def test_weighted_update_singular_keeps_previous():
    series = ObservationSeries.from_values([5.0, 5.0, 5.0, 5.0, 6.0])
    q = np.zeros((4, 2))
    q[:3, 0] = 1.0
    q[3, 1] = 1.0
    assert weighted_ls_update(series, q, 0, previous=(0.9, 0.5)) == (0.9, 0.5)
    with pytest.raises(DegenerateSegmentError):
        weighted_ls_update(series, q, 0)
    with pytest.raises(ValidationError, match="min_state_weight"):
        weighted_ls_update(series, q, 1, min_state_weight=2.0)


# === 시그마 / 전이 ===

def test_weighted_update_recovers_interleaved_states(true_single_model, noise_free_trace):
    sharp = true_single_model.replace(sigma=np.full(true_single_model.n_states, 0.05))
    q, _ = forward_backward(sharp, noise_free_trace.series)
    for i in range(sharp.n_states):
        c_hat, mu_hat = weighted_ls_update(noise_free_trace.series, q, i)
        assert c_hat == pytest.approx(sharp.c[i], abs=1e-3)
        assert mu_hat == pytest.approx(sharp.mu[i], abs=1e-3)


def _two_state_model(**changes) -> SwitchingARModel:
    data = dict(c=[0.9, 0.8], mu=[1.0, 2.0], sigma=[1.0, 1.0],
                trans=[[0.5, 0.5], [0.5, 0.5]], init=[0.5, 0.5])
    data.update(changes)
    return SwitchingARModel(**data)


def test_update_sigma_single_pair():
    model = _two_state_model()
    series = ObservationSeries.from_values([10.0, 12.5])
    path = DecodedPath.from_states([0])
    sigma = update_sigma(series, path, model, tie_global=False)
    assert sigma[0] == pytest.approx(abs(12.5 - (0.9 * 10.0 + 1.0)))
    assert sigma[1] == 1.0

    exact = ObservationSeries.from_values([10.0, 10.0])
    assert update_sigma(exact, path, model, tie_global=False)[0] == pytest.approx(1e-6)


def test_update_sigma_pooled_and_min_weight():
    model = _two_state_model()
    series = ObservationSeries.from_values([10.0, 12.0, 11.0, 9.0])
    states = np.array([0, 0, 1])
    resid = np.array([12.0 - 10.0, 11.0 - 11.8, 9.0 - (0.8 * 11.0 + 2.0)])
    pooled = update_sigma(series, states, model, tie_global=True)
    np.testing.assert_allclose(pooled, np.sqrt(np.mean(resid ** 2)))
    kept = update_sigma(series, states, model, tie_global=False, min_weight=2.0)
    assert kept[1] == 1.0
    assert kept[0] == pytest.approx(np.sqrt(np.mean(resid[:2] ** 2)))


def test_update_sigma_recovers_noise_level(physics):
    # 인원 1 이상만 유지해 0 에서 잘리는 샘플이 없도록
    schedule = Schedule(steps=tuple((120, 1 + j % 4, j % 2) for j in range(12)))
    trace = SimulationService.simulate(physics, schedule, y0=300.0, noise_sd=3.0, seed=31)
    assert trace.clamp_count == 0
    space = build_state_space(physics)
    model = init_from_physics(physics, space, sigma0=1.0, self_stay=0.95)
    truth = space.encode(trace.truth.occupancy, trace.truth.regime)
    assert truth.size == 1440
    sigma = update_sigma(trace.series, truth, model, tie_global=True)
    assert 2.7 <= sigma[0] <= 3.3


def test_update_transitions_counts_and_smoothing():
    path = np.array([0, 0, 1, 1, 1, 0])
    np.testing.assert_allclose(update_transitions(path, 3, alpha=0.0),
                               [[0.5, 0.5, 0.0], [1 / 3, 2 / 3, 0.0], [1 / 3, 1 / 3, 1 / 3]])
    smoothed = update_transitions(path, 3, alpha=1.0)
    np.testing.assert_allclose(smoothed[0], [2 / 5, 2 / 5, 1 / 5])
    np.testing.assert_allclose(smoothed.sum(axis=1), 1.0, atol=1e-12)
    with pytest.raises(ValidationError):
        update_transitions(np.array([0]), 3)


def test_factored_transitions_are_kronecker_products():
    rng = np.random.default_rng(4)
    counts = rng.integers(0, 20, size=(6, 6)).astype(float)
    trans = factored_transitions(counts, 3, 2, 1.0)
    np.testing.assert_allclose(trans.sum(axis=1), 1.0, atol=1e-12)
    occ, reg = transition_factors(trans, 3, 2)
    np.testing.assert_allclose(np.kron(occ, reg), trans, atol=1e-12)
    blocks = counts.reshape(3, 2, 3, 2)
    np.testing.assert_allclose(occ, smoothed_transitions(blocks.sum(axis=(1, 3)), 1.0), atol=1e-12)
    np.testing.assert_allclose(reg, smoothed_transitions(blocks.sum(axis=(0, 2)), 1.0), atol=1e-12)


def test_transition_estimate_follows_options(physics, single_physics):
    single = init_from_physics(single_physics, build_state_space(single_physics), sigma0=2.0, self_stay=0.9)
    counts = np.arange(9, dtype=float).reshape(3, 3)
    np.testing.assert_array_equal(estimate_transitions(counts, single, FitOptions()),
                                  smoothed_transitions(counts, 1.0))

    two = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.9)
    counts = np.random.default_rng(5).integers(0, 9, size=(10, 10)).astype(float)
    full = estimate_transitions(counts, two, FitOptions(factor_transitions=False))
    np.testing.assert_array_equal(full, smoothed_transitions(counts, 1.0))
    factored = estimate_transitions(counts, two, FitOptions())
    np.testing.assert_allclose(factored, factored_transitions(counts, 5, 2, 1.0))
    assert objective_prior(two, FitOptions(factor_transitions=False)) == pytest.approx(np.log(two.trans).sum())


# === EM-Viterbi ===

def test_em_from_true_model_converges_fast(true_single_model, noise_free_trace):
    report = fit_em_viterbi(true_single_model, noise_free_trace.series, FitOptions())
    assert report.converged
    assert report.iterations <= 2
    np.testing.assert_array_equal(report.final_path.occupancy, noise_free_trace.truth.occupancy)
    np.testing.assert_allclose(report.final_model.c, true_single_model.c, atol=1e-9)


def test_em_refit_converges_in_one_iteration(physics, day_trace):
    space = build_state_space(physics)
    model0 = init_from_physics(physics, space, sigma0=2.0, self_stay=0.95)
    first = fit_em_viterbi(model0, day_trace.series, FitOptions())
    again = fit_em_viterbi(first.final_model, day_trace.series, FitOptions(start_search=False, warm_start_steps=0))
    assert again.iterations == 1
    assert again.converged


def test_em_trace_is_monotone_over_seeds():
    physics = PhysicsConfig(max_occupancy=3)
    space = build_state_space(physics)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        schedule = SimulationService.random_schedule(physics, 400, 30, 120, seed=seed)
        trace = SimulationService.simulate(physics, schedule, y0=0.0, noise_sd=2.0, seed=seed + 100)
        init_physics = physics.with_regimes(np.array(physics.regimes) * rng.uniform(0.7, 1.3, 2))
        model0 = init_from_physics(init_physics, space, sigma0=3.0, self_stay=0.95)
        report = fit_em_viterbi(model0, trace.series, FitOptions(max_iters=30))
        values = np.array(report.loglik_trace)
        steps = np.diff(values)
        assert np.all(steps >= -SLACK * np.maximum(1.0, np.abs(values[:-1]))), seed


def test_em_reports_starved_states(noise_free_trace):
    physics = PhysicsConfig(regimes=(100.0,), max_occupancy=4)
    model0 = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    report = fit_em_viterbi(model0, noise_free_trace.series, FitOptions())
    assert set(report.starved_states) >= {3, 4}
    for i in (3, 4):
        assert report.final_model.mu[i] == model0.mu[i]


def test_em_all_starved_raises(true_single_model, noise_free_trace):
    with pytest.raises(InitializationError):
        fit_em_viterbi(true_single_model, noise_free_trace.series, FitOptions(min_state_weight=10_000))


def test_em_keeps_initial_distribution(physics, day_trace):
    model0 = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    report = fit_em_viterbi(model0, day_trace.series, FitOptions())
    np.testing.assert_array_equal(report.final_model.init, model0.init)
    np.testing.assert_allclose(report.final_model.trans.sum(axis=1), 1.0, atol=1e-12)
    assert np.all(report.final_model.trans > 0)


def test_em_decodes_day_trace_accurately(physics, day_trace):
    model0 = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    report = fit_em_viterbi(model0, day_trace.series, FitOptions())
    assert score(report.final_path, day_trace).accuracy >= 0.9


def test_em_labels_regimes_in_ventilation_order(physics, day_trace):
    init = physics.with_regimes((84.0, 80.0))
    model0 = init_from_physics(init, build_state_space(init), sigma0=2.0, self_stay=0.95)
    report = fit_em_viterbi(model0, day_trace.series, FitOptions())
    tau_hat = implied_ventilation_times(report.final_model)
    assert tau_hat[0] < tau_hat[1]
    assert score(report.final_path, day_trace).accuracy >= 0.9


def test_complete_loglik_trace_excludes_transition_prior(physics, day_trace):
    model0 = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    opts = FitOptions()
    report = fit_em_viterbi(model0, day_trace.series, opts)
    assert len(report.complete_loglik_trace) == len(report.loglik_trace)
    gap = np.array(report.loglik_trace) - np.array(report.complete_loglik_trace)
    occ, reg = transition_factors(report.final_model.trans, physics.max_occupancy + 1, physics.n_regimes)
    assert gap[-1] == pytest.approx(np.log(occ).sum() + np.log(reg).sum(), rel=1e-9)
    assert gap[-1] == pytest.approx(objective_prior(report.final_model, opts), rel=1e-9)
    assert report.to_dict()["complete_loglik_trace"] == pytest.approx(report.complete_loglik_trace)

    unsmoothed = fit_em_viterbi(model0, day_trace.series, FitOptions(transition_smoothing=0.0))
    np.testing.assert_allclose(unsmoothed.loglik_trace, unsmoothed.complete_loglik_trace)


# === 시작점 / 라벨 정리 ===

def test_start_search_moves_to_better_grid_point(single_physics, noise_free_trace):
    space = build_state_space(single_physics)
    off = init_from_physics(single_physics.with_regimes((80.0,)), space, sigma0=2.0, self_stay=0.95)
    start = search_start(off, noise_free_trace.series, FitOptions())
    assert implied_ventilation_times(start)[0] == pytest.approx(100.0, rel=1e-9)
    np.testing.assert_array_equal(start.sigma, off.sigma)
    np.testing.assert_array_equal(start.trans, off.trans)
    assert search_start(off, noise_free_trace.series, FitOptions(start_search=False)) is off


def test_start_search_keeps_best_model(true_single_model, noise_free_trace):
    assert search_start(true_single_model, noise_free_trace.series, FitOptions()) is true_single_model


def test_canonical_order_sorts_regimes_by_ventilation_time(physics, day_trace):
    swapped = physics.with_regimes((100.0, 70.0))
    space = build_state_space(swapped)
    model = init_from_physics(swapped, space, sigma0=2.0, self_stay=0.95)
    path, _ = SwitchingARDecoder(model).decode(day_trace.series)
    before = SwitchingARDecoder(model).path_score(day_trace.series, path.states)

    ordered, states = canonical_regime_order(model, path.states)
    np.testing.assert_allclose(implied_ventilation_times(ordered), [70.0, 100.0])
    assert ordered.physics.regimes == (70.0, 100.0)
    relabeled = DecodedPath.from_states(states, space)
    np.testing.assert_array_equal(relabeled.occupancy, path.occupancy)
    np.testing.assert_array_equal(relabeled.regime, 1 - path.regime)
    assert SwitchingARDecoder(ordered).path_score(day_trace.series, states) == pytest.approx(before, rel=1e-12)

    same, same_states = canonical_regime_order(ordered, states)
    assert same is ordered
    np.testing.assert_array_equal(same_states, states)


# === Baum-Welch ===

def test_baum_welch_evidence_is_monotone_over_seeds():
    physics = PhysicsConfig(max_occupancy=2)
    space = build_state_space(physics)
    for seed in range(20):
        rng = np.random.default_rng(seed)
        schedule = SimulationService.random_schedule(physics, 250, 25, 100, seed=seed)
        trace = SimulationService.simulate(physics, schedule, y0=0.0, noise_sd=2.0, seed=seed + 500)
        init_physics = physics.with_regimes(np.array(physics.regimes) * rng.uniform(0.7, 1.3, 2))
        model0 = init_from_physics(init_physics, space, sigma0=3.0, self_stay=0.9)
        _, values = fit_baum_welch(model0, trace.series, FitOptions(min_state_weight=0.5), n_steps=8)
        values = np.array(values)
        assert values.size == 9
        assert np.all(np.diff(values) >= -SLACK * np.maximum(1.0, np.abs(values[:-1]))), seed


def test_baum_welch_step_returns_valid_model(single_physics, noise_free_trace):
    model0 = init_from_physics(single_physics, build_state_space(single_physics), sigma0=5.0, self_stay=0.9)
    model1 = fit_baum_welch_step(model0, noise_free_trace.series, FitOptions())
    assert model1.n_states == model0.n_states
    np.testing.assert_array_equal(model1.init, model0.init)
    assert np.all((model1.c > 0) & (model1.c < 1))
    assert model1.space == model0.space


def test_baum_welch_step_from_truth_is_stationary(single_physics, noise_free_trace):
    truth = init_from_physics(single_physics, build_state_space(single_physics),
                              sigma0=SIGMA_FLOOR, self_stay=0.9)
    moved = fit_baum_welch_step(truth, noise_free_trace.series, FitOptions())
    assert np.max(np.abs(moved.c - truth.c)) < 1e-6
    assert np.max(np.abs(moved.mu - truth.mu)) < 1e-6
    assert np.max(np.abs(moved.sigma - truth.sigma)) < 1e-6


def test_baum_welch_rejects_zero_steps(true_single_model, noise_free_trace):
    with pytest.raises(ValidationError):
        fit_baum_welch(true_single_model, noise_free_trace.series, n_steps=0)


def test_tied_coefficient_is_clipped_inside_unit_interval():
    physics = PhysicsConfig(regimes=(30.0,), max_occupancy=1)
    model0 = init_from_physics(physics, build_state_space(physics), sigma0=1.0, self_stay=0.9)
    # 발산하는 계열: 최소제곱 c 가 1 을 넘는다
    y = [1.0]
    for _ in range(40):
        y.append(1.05 * y[-1])
    report = fit_em_viterbi(model0, ObservationSeries.from_values(y), FitOptions(min_state_weight=1.0))
    assert np.all(report.final_model.c < 1.0)
    assert np.all(report.final_model.c > 0.0)


def test_schedule_fixture_visits_every_level(step_schedule):
    occupancy, _ = step_schedule.expand(1.0)
    assert set(occupancy.tolist()) == {0, 1, 2}
    assert Schedule.from_arrays(occupancy, np.zeros_like(occupancy), 1.0) == step_schedule
