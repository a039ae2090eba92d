# tests/test_inference.py
"""Viterbi / forward-backward 를 전수 열거와 비교"""

import numpy as np
import pytest
from scipy.stats import norm

from core.errors import ValidationError
from models.series import ObservationSeries
from models.simple_hmm import SimpleHMM
from models.state_space import build_state_space
from models.switching_ar import SwitchingARModel, init_from_physics
from solver.hmm_solver import GaussianHMMDecoder, decode_simple_hmm
from solver.msar_solver import (
    SwitchingARDecoder, decode_with_posteriors, emission_logdensity,
    forward_backward, forward_backward_full, path_loglikelihood, viterbi,
)
from oracles import brute_force, random_model, random_series

N_INSTANCES = 120


def _instances(seed: int):
    rng = np.random.default_rng(seed)
    for _ in range(N_INSTANCES):
        n_states = int(rng.integers(1, 5))
        n_transitions = int(rng.integers(1, 9))
        yield random_model(rng, n_states), random_series(rng, n_transitions)


def test_viterbi_matches_exhaustive_search():
    checked = 0
    for model, series in _instances(2024):
        decoder = SwitchingARDecoder(model)
        best, best_score, gap, _, _ = brute_force(decoder.log_emissions(series), model.log_trans, model.log_init)
        path, score = viterbi(model, series)
        assert score == pytest.approx(best_score, rel=1e-10, abs=1e-10)
        if gap > 1e-9:
            np.testing.assert_array_equal(path.states, best)
            checked += 1
    assert checked >= 100


def test_forward_backward_matches_exhaustive_sums():
    for model, series in _instances(7):
        decoder = SwitchingARDecoder(model)
        _, _, _, evidence, posteriors = brute_force(
            decoder.log_emissions(series), model.log_trans, model.log_init)
        q, log_evidence = forward_backward(model, series)
        assert log_evidence == pytest.approx(evidence, rel=1e-8)
        np.testing.assert_allclose(q.q, posteriors, atol=1e-8)


def test_expected_transitions_sum_to_step_count():
    rng = np.random.default_rng(5)
    model = random_model(rng, 3)
    series = random_series(rng, 8)
    result = forward_backward_full(model, series)
    assert result.expected_transitions.sum() == pytest.approx(series.n_transitions - 1, rel=1e-10)
    np.testing.assert_allclose(result.expected_transitions.sum(axis=1),
                               result.posteriors[:-1].sum(axis=0), rtol=1e-9)


def test_simple_hmm_viterbi_matches_exhaustive_search():
    rng = np.random.default_rng(99)
    for _ in range(N_INSTANCES):
        n_states = int(rng.integers(1, 5))
        model = SimpleHMM(
            means=rng.uniform(0.0, 60.0, n_states),
            sds=rng.uniform(3.0, 10.0, n_states),
            trans=rng.dirichlet(np.ones(n_states), size=n_states),
            init=rng.dirichlet(np.ones(n_states)),
        )
        series = random_series(rng, int(rng.integers(1, 9)))
        decoder = GaussianHMMDecoder(model)
        best, best_score, gap, _, _ = brute_force(decoder.log_emissions(series), model.log_trans, model.log_init)
        states, score = decoder.viterbi(series)
        assert score == pytest.approx(best_score, rel=1e-10, abs=1e-10)
        if gap > 1e-9:
            np.testing.assert_array_equal(states, best)
            np.testing.assert_array_equal(decode_simple_hmm(model, series).occupancy, best)


def test_single_state_posteriors_are_one():
    model = SwitchingARModel(c=[0.9], mu=[3.0], sigma=[2.0], trans=[[1.0]], init=[1.0])
    series = ObservationSeries.from_values([10.0, 12.0, 13.5, 11.0, 15.0])
    q, evidence = forward_backward(model, series)
    np.testing.assert_array_equal(q.q, np.ones((4, 1)))
    y = series.y
    expected = norm.logpdf(y[1:], loc=0.9 * y[:-1] + 3.0, scale=2.0).sum()
    assert evidence == pytest.approx(expected, rel=1e-12)


def test_viterbi_ties_pick_lowest_index():
    model = SwitchingARModel(c=[0.9, 0.9], mu=[1.0, 1.0], sigma=[1.0, 1.0],
                             trans=[[0.5, 0.5], [0.5, 0.5]], init=[0.5, 0.5])
    path, _ = viterbi(model, ObservationSeries.from_values([0.0, 1.0, 2.0, 2.5]))
    np.testing.assert_array_equal(path.states, [0, 0, 0])


def test_path_loglikelihood_of_viterbi_path_equals_score():
    rng = np.random.default_rng(3)
    model = random_model(rng, 4)
    series = random_series(rng, 30)
    path, score = viterbi(model, series)
    assert path_loglikelihood(model, series, path) == pytest.approx(score, rel=1e-12)
    with pytest.raises(ValidationError):
        path_loglikelihood(model, series, path.states[:-1])


def test_emission_logdensity():
    model = SwitchingARModel(c=[0.8, 0.95], mu=[2.0, 0.5], sigma=[1.5, 3.0],
                             trans=[[0.9, 0.1], [0.1, 0.9]], init=[0.5, 0.5])
    value = emission_logdensity(model, 1, 100.0, 96.0)
    assert value == pytest.approx(norm.logpdf(96.0, loc=95.5, scale=3.0))
    with pytest.raises(ValidationError):
        emission_logdensity(model, 2, 1.0, 1.0)


def test_decode_with_posteriors_reports_confidence():
    rng = np.random.default_rng(8)
    model = random_model(rng, 3)
    series = random_series(rng, 20)
    path, score, evidence = decode_with_posteriors(model, series)
    assert path.posterior_max.shape == (20,)
    assert np.all((path.posterior_max > 0) & (path.posterior_max <= 1 + 1e-12))
    assert score <= evidence + 1e-9


def test_viterbi_is_invariant_to_level_shift(physics, day_trace):
    model = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    shift = 35.0
    shifted_series = ObservationSeries.from_values(day_trace.series.y + shift)
    shifted_model = model.replace(mu=model.mu + (1.0 - model.c) * shift)
    path, score = viterbi(model, day_trace.series)
    shifted_path, shifted_score = viterbi(shifted_model, shifted_series)
    np.testing.assert_array_equal(shifted_path.states, path.states)
    assert shifted_score == pytest.approx(score, rel=1e-9)


def test_viterbi_states_have_positive_posterior(physics, day_trace):
    model = init_from_physics(physics, build_state_space(physics), sigma0=2.0, self_stay=0.95)
    path, _ = viterbi(model, day_trace.series)
    q, _ = forward_backward(model, day_trace.series)
    on_path = q.q[np.arange(len(path)), path.states]
    assert np.all(on_path > 0)
