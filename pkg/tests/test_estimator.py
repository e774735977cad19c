"""Disturbance-power and slope estimation from generator measurements."""

import math

import numpy as np
import pytest

from freqstab import (
    DegenerateWeightsError,
    GeneratorCoupling,
    InsufficientSamplesError,
    InvalidParameterError,
    NetworkSnapshot,
    OutOfRangeError,
    ResponseSet,
    Scenario,
    StepDisturbance,
    anchored_slope,
    disturbance_power_from_network,
    disturbance_power_from_pe,
    minute_slope_at_threshold,
    simulate,
    slope_estimate,
    synthesize_generator_responses,
)
from _support import benchmark_params, make_params


def _rs(times, series, freq=None):
    return ResponseSet(sample_times=np.asarray(times, dtype=float),
                       per_generator_dpe={k: np.asarray(v, dtype=float)
                                          for k, v in series.items()},
                       per_generator_frequency=freq)


def test_total_power_sums_generator_series():
    t = np.linspace(0.0, 1.0, 11)
    rs = _rs(t, {"G1": np.full(11, 10.0), "G2": np.full(11, 20.0),
                 "G3": np.full(11, 30.0)})
    assert disturbance_power_from_pe(rs, 0.5) == pytest.approx(60.0)


def test_empty_response_set_warns_and_returns_zero():
    rs = _rs(np.linspace(0.0, 1.0, 11), {})
    with pytest.warns(RuntimeWarning):
        assert disturbance_power_from_pe(rs, 0.5) == 0.0
    assert np.all(rs.total_power() == 0.0)
    assert rs.system_frequency() is None


def test_query_outside_the_sampled_range_is_rejected():
    rs = _rs([0.0, 1.0], {"G1": [0.0, 5.0]})
    with pytest.raises(OutOfRangeError):
        disturbance_power_from_pe(rs, 1.5)
    with pytest.raises(OutOfRangeError):
        disturbance_power_from_pe(rs, -0.1)


def test_response_set_validation():
    with pytest.raises(InvalidParameterError):
        _rs([0.0, 1.0, 1.0], {"G1": [0.0, 1.0, 2.0]})
    with pytest.raises(InvalidParameterError):
        _rs([0.0, 1.0], {"G1": [0.0, 1.0, 2.0]})
    with pytest.raises(InvalidParameterError):
        _rs([0.0, 1.0], {"G1": [0.0, 1.0]}, freq={"G1": [0.0]})


def test_simulated_split_recovers_the_injected_step():
    p = benchmark_params()
    sc = Scenario(params=p, disturbance=StepDisturbance(t0_s=0.5, dp0_mw=600.0),
                  horizon_s=6.0, dt_s=0.005, deadband_hz=0.033)
    rs = synthesize_generator_responses(sc, {"G1": 3.0, "G2": 2.0, "G3": 1.0})
    est = disturbance_power_from_pe(rs, 4.0)
    assert est == pytest.approx(600.0, rel=0.01)


def test_network_reconstruction_examples():
    one = NetworkSnapshot(u_p=1.0, s_n=1000.0, generators=(
        GeneratorCoupling("G1", e_i=1.0, b_ip=10.0, delta_ip=0.0,
                          d_delta_ip=0.01),))
    assert disturbance_power_from_network(one) == pytest.approx(100.0)

    twin = GeneratorCoupling("G", e_i=1.0, b_ip=10.0, delta_ip=0.0,
                             d_delta_ip=0.003)
    two = NetworkSnapshot(u_p=1.0, s_n=1000.0, generators=(
        twin, GeneratorCoupling("H", e_i=1.0, b_ip=10.0, delta_ip=0.0,
                                d_delta_ip=0.003)))
    assert disturbance_power_from_network(two) == pytest.approx(60.0)

    still = NetworkSnapshot(u_p=1.0, s_n=1000.0, generators=(
        GeneratorCoupling("G1", e_i=1.0, b_ip=10.0, delta_ip=0.2,
                          d_delta_ip=0.0),))
    assert disturbance_power_from_network(still) == 0.0


def test_network_weights_respect_the_power_angle():
    snap = NetworkSnapshot(u_p=1.05, s_n=500.0, generators=(
        GeneratorCoupling("G1", e_i=1.1, b_ip=8.0, delta_ip=0.3,
                          d_delta_ip=0.002),))
    w = snap.synchronizing_weights()["G1"]
    assert w == pytest.approx(1.05 * 1.1 * 8.0 * math.cos(0.3), rel=1e-12)
    assert disturbance_power_from_network(snap) == pytest.approx(w * 0.002 * 500.0,
                                                                 rel=1e-12)


def test_network_validation():
    with pytest.raises(InvalidParameterError):
        GeneratorCoupling("G1", e_i=0.0, b_ip=1.0, delta_ip=0.0, d_delta_ip=0.0)
    with pytest.raises(InvalidParameterError):
        NetworkSnapshot(u_p=0.0, s_n=100.0, generators=())


def test_anchored_slope_exact_on_affine_data():
    t = np.linspace(0.0, 2.0, 201)
    assert anchored_slope(t, 60.0 * t + 5.0, 0.5, 1.5) == pytest.approx(60.0,
                                                                        rel=1e-12)
    assert anchored_slope(t, np.full_like(t, 7.0), 0.5, 1.5) == 0.0


def test_anchored_slope_window_validation():
    t = np.linspace(0.0, 2.0, 21)
    y = 3.0 * t
    with pytest.raises(InvalidParameterError):
        anchored_slope(t, y, 1.0, 1.0)
    with pytest.raises(OutOfRangeError):
        anchored_slope(t, y, -0.5, 1.0)
    with pytest.raises(DegenerateWeightsError):
        anchored_slope(t, y, 2.0, 5.0)  # only the anchor sample inside


def test_slope_estimate_on_a_clean_ramp():
    t = np.arange(0.0, 2.0, 0.01)
    rs = _rs(t, {"G1": 36.0 * np.maximum(t - 0.5, 0.0),
                 "G2": 24.0 * np.maximum(t - 0.5, 0.0)})
    assert slope_estimate(rs, (0.5, 1.0)) == pytest.approx(60.0, rel=1e-12)


def test_slope_estimate_needs_three_samples():
    rs = _rs([0.0, 1.0, 2.0, 3.0], {"G1": [0.0, 1.0, 2.0, 3.0]})
    with pytest.raises(InsufficientSamplesError):
        slope_estimate(rs, (0.4, 0.6))


def test_slope_estimator_noise_statistics():
    # 1 MW measurement noise at 100 Hz over a 0.5 s window spreads the
    # estimate to roughly +-3 MW/s around the true 60 MW/s
    t = np.arange(0.0, 0.5 + 1e-9, 0.01)
    clean = 60.0 * t
    rng = np.random.default_rng(42)
    draws = np.empty(1000)
    for i in range(draws.size):
        noisy = clean + rng.normal(0.0, 1.0, size=t.size)
        draws[i] = anchored_slope(t, noisy, 0.0, 0.5)
    assert float(np.mean(draws)) == pytest.approx(60.0, abs=0.5)
    assert 2.4 < float(np.std(draws)) < 3.6


def test_minute_slope_from_the_compensation_budget():
    p = benchmark_params(s_n=3846.6666666666665, p_gn=546.1333333333333,
                         p_new=273.06666666666666, p_l0=5828.636363636364)
    k_m = minute_slope_at_threshold(p, 0.33, 140.1)
    assert k_m == pytest.approx(0.9, abs=1e-12)
    # the crossing time is inversely proportional to the slope
    assert minute_slope_at_threshold(p, 0.33, 280.2) == pytest.approx(k_m / 2.0,
                                                                      rel=1e-12)


def test_minute_slope_degenerate_and_invalid_inputs():
    p = make_params(m=0.0, n=0.0, k_l=0.0)
    assert minute_slope_at_threshold(p, 0.33, 100.0) == 0.0
    with pytest.raises(InvalidParameterError):
        minute_slope_at_threshold(p, 0.33, 0.0)
    with pytest.raises(InvalidParameterError):
        minute_slope_at_threshold(p, -0.1, 100.0)
