# tests/test_baseline.py
"""단순 가우시안 HMM 비교 기준 테스트"""

import numpy as np
import pytest

from core.errors import ValidationError
from models.physics import PhysicsConfig
from models.schedule import Schedule
from models.series import ObservationSeries
from models.simple_hmm import SimpleHMM
from services.simulation_service import simulate
from solver.base_solver import FitOptions
from solver.hmm_solver import decode_simple_hmm, fit_simple_hmm, initial_simple_hmm


def _two_clusters(seed: int) -> ObservationSeries:
    rng = np.random.default_rng(seed)
    levels = np.repeat([100.0, 400.0, 100.0, 400.0, 100.0], 80)
    return ObservationSeries.from_values(levels + rng.normal(0.0, 10.0, levels.size))


def test_two_clusters_recovered():
    model = fit_simple_hmm(_two_clusters(0), 2, FitOptions())
    np.testing.assert_allclose(model.means, [100.0, 400.0], rtol=0.05)
    assert np.all(np.diff(model.means) > 0)
    assert np.all(model.sds < 20.0)


def test_single_state_is_mean_and_sd():
    series = _two_clusters(1)
    model = fit_simple_hmm(series, 1, FitOptions())
    y = series.y[1:]
    assert model.means[0] == pytest.approx(y.mean(), rel=1e-12)
    assert model.sds[0] == pytest.approx(y.std(), rel=1e-12)
    np.testing.assert_array_equal(model.trans, [[1.0]])


def test_quantile_initialization():
    series = ObservationSeries.from_values(np.arange(101, dtype=float))
    model = initial_simple_hmm(series, 4, method="quantile")
    np.testing.assert_allclose(model.means, np.quantile(np.arange(1, 101), [1 / 8, 3 / 8, 5 / 8, 7 / 8]))


def test_span_initialization():
    series = ObservationSeries.from_values(np.arange(101, dtype=float))
    np.testing.assert_allclose(initial_simple_hmm(series, 5).means, [1.0, 25.75, 50.5, 75.25, 100.0])
    assert initial_simple_hmm(series, 1).means[0] == pytest.approx(50.5)
    with pytest.raises(ValidationError, match="init_method"):
        initial_simple_hmm(series, 2, method="kmeans")


def test_collapsed_quantiles_are_spread_above_top_level():
    # 60% 가 0 인 계열: 아래쪽 분위수 세 개가 모두 0
    y = np.concatenate([[0.0], np.zeros(60), np.full(20, 50.0), np.full(20, 100.0)])
    model = initial_simple_hmm(ObservationSeries.from_values(y), 5, method="quantile")
    assert np.all(np.diff(model.means) > 0)
    assert model.means[0] == 0.0
    np.testing.assert_allclose(model.means[1:3], [50.0, 100.0])
    np.testing.assert_allclose(model.means[3:], [150.0, 200.0])


def test_pooled_sd_is_shared():
    model = fit_simple_hmm(_two_clusters(3), 2, FitOptions(tie_sigma_global=True))
    assert model.sds[0] == model.sds[1]
    untied = fit_simple_hmm(_two_clusters(3), 2, FitOptions(tie_sigma_global=False))
    assert untied.sds[0] != untied.sds[1]


def test_decoded_states_stay_inside_model():
    series = _two_clusters(4)
    model = fit_simple_hmm(series, 3, FitOptions())
    path = decode_simple_hmm(model, series)
    assert len(path) == series.n_transitions
    assert path.states.max() < model.n_states


def test_fitted_states_are_sorted_by_mean():
    physics = PhysicsConfig(regimes=(5.0,), max_occupancy=3)
    schedule = Schedule(steps=((100, 3, 0), (100, 0, 0), (100, 2, 0), (100, 1, 0)))
    trace = simulate(physics, schedule, y0=0.0, noise_sd=1.0, seed=3)
    model = fit_simple_hmm(trace.series, 4, FitOptions())
    assert np.all(np.diff(model.means) >= 0)
    path = decode_simple_hmm(model, trace.series)
    assert np.mean(path.occupancy == trace.truth.occupancy) > 0.8


def test_constant_series_decodes_to_state_zero():
    model = SimpleHMM(means=[50.0, 300.0, 600.0], sds=[10.0, 10.0, 10.0],
                      trans=np.full((3, 3), 1 / 3), init=np.full(3, 1 / 3))
    path = decode_simple_hmm(model, ObservationSeries.from_values(np.full(30, 50.0)))
    np.testing.assert_array_equal(path.occupancy, np.zeros(29, dtype=int))


def test_decoded_switch_lags_slow_ventilation():
    physics = PhysicsConfig(regimes=(100.0,), max_occupancy=2)
    schedule = Schedule(steps=((100, 0, 0), (200, 2, 0)))
    trace = simulate(physics, schedule, y0=0.0, noise_sd=0.0)
    levels = [physics.steady_state(n, 0) for n in range(3)]
    model = SimpleHMM(means=levels, sds=[50.0, 50.0, 50.0],
                      trans=[[0.98, 0.01, 0.01], [0.01, 0.98, 0.01], [0.01, 0.01, 0.98]],
                      init=[1 / 3, 1 / 3, 1 / 3])
    path = decode_simple_hmm(model, trace.series)
    true_change = int(np.flatnonzero(trace.truth.occupancy == 2)[0])
    first_two = int(np.flatnonzero(path.occupancy == 2)[0])
    assert first_two - true_change >= 1


def test_simple_hmm_validation():
    with pytest.raises(ValidationError):
        fit_simple_hmm(_two_clusters(2), 0, FitOptions())
    with pytest.raises(ValidationError, match="simple_hmm.sds"):
        SimpleHMM(means=[1.0], sds=[0.0], trans=[[1.0]], init=[1.0])
