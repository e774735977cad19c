"""Unit tests for the aggregated model constants and thresholds."""

import math

import pytest

from freqstab import (
    SystemParameters,
    Thresholds,
    compute_frequency_threshold,
    compute_power_threshold,
    derive_aggregates,
    from_per_unit,
    to_per_unit,
)
from freqstab.errors import InvalidParameterError


def make_params(**over):
    base = dict(
        f_n=50.0, s_n=1000.0, h=4.0, k_n=0.5, k_v=0.0, k_l=1.0, k_w=10.0,
        r=0.05, f_h=0.3, t_r=10.0, p_gn=1000.0, p_new=1000.0, p_l0=1000.0,
        m=0.06, n=0.1, k_r=2000.0,
    )
    base.update(over)
    return SystemParameters(**base)


def test_per_unit_round_trip():
    assert to_per_unit(250.0, 1000.0) == 0.25
    assert from_per_unit(0.25, 1000.0) == 250.0
    assert from_per_unit(to_per_unit(37.3, 481.0), 481.0) == pytest.approx(37.3, rel=1e-15)


def test_aggregates_mixed_fleet():
    # H=1, Kn=0.5, Kv=2 -> H_sys = 1 + 0.5*2/2 = 1.5; K_L=1, Kw=4 -> K_Lsys = 1 + 0.5*4 = 3
    agg = derive_aggregates(make_params(h=1.0, k_n=0.5, k_v=2.0, k_l=1.0, k_w=4.0))
    assert agg.h_sys == pytest.approx(1.5)
    assert agg.k_lsys == pytest.approx(3.0)
    assert agg.t_j == pytest.approx(3.0)


def test_aggregates_no_virtual_inertia():
    # H=1.34, Kn=1/3, Kv=0 -> H_sys = 1.34, T_J = 2.68; K_L=2, Kw=3 -> K_Lsys = 3
    agg = derive_aggregates(make_params(h=1.34, k_n=1.0 / 3.0, k_v=0.0, k_l=2.0, k_w=3.0))
    assert agg.h_sys == pytest.approx(1.34)
    assert agg.t_j == pytest.approx(2.68)
    assert agg.k_lsys == pytest.approx(3.0)


def test_power_threshold():
    assert compute_power_threshold(3.0, 0.5) == pytest.approx(1.5)
    assert compute_power_threshold(7.3, 0.5) == pytest.approx(3.65)
    with pytest.raises(InvalidParameterError):
        compute_power_threshold(3.0, 0.0)


def test_frequency_threshold_worked_example():
    # 1000 MW base, droop 0.05 (gain 20), converter gain 10, reserves
    # 0.06*1000 + 0.1*1000 = 160 MW, dead band 0.033 Hz at 50 Hz:
    # 160 / 30000 * 50 + 0.033 = 0.29967 Hz, quoted rounded as 0.3 Hz.
    p = make_params()
    df_sh = compute_frequency_threshold(p, f_d=0.033)
    assert abs(df_sh - 0.3) < 5e-4
    assert df_sh == pytest.approx(160.0 / 30000.0 * 50.0 + 0.033, rel=1e-12)


def test_frequency_threshold_large_interconnection():
    # Installed capacities 5400 + 6900 MW on a 5400 MW base with equal 6 %
    # reserve shares reproduce the 0.33 Hz setting used in the case study.
    p = make_params(s_n=5400.0, p_gn=5400.0, p_new=6900.0, m=0.06, n=0.06,
                    k_w=3.0, k_l=2.0, k_n=1.0 / 3.0, h=1.34)
    df_sh = compute_frequency_threshold(p, f_d=0.033)
    assert abs(df_sh - 0.33) < 5e-4


def test_thresholds_explicit_wins():
    p = make_params()
    th = Thresholds.derive(p, k1=3.0, t_dist=0.5, f_d=0.033,
                           df_ss_lim=0.2, df_max_lim=0.75,
                           dp_sh=3.65, df_sh=0.33)
    assert th.dp_sh == 3.65
    assert th.df_sh == 0.33
    auto = Thresholds.derive(p, k1=3.0, t_dist=0.5, f_d=0.033,
                             df_ss_lim=0.2, df_max_lim=0.75)
    assert auto.dp_sh == pytest.approx(1.5)
    assert auto.df_sh == pytest.approx(0.29966667, rel=1e-6)


def test_thresholds_ordering_enforced():
    p = make_params()
    with pytest.raises(InvalidParameterError):
        Thresholds.derive(p, k1=3.0, t_dist=0.5, f_d=0.0,
                          df_ss_lim=0.8, df_max_lim=0.75, df_sh=0.3)
    with pytest.raises(InvalidParameterError):
        Thresholds.derive(p, k1=3.0, t_dist=0.5, f_d=0.0,
                          df_ss_lim=0.2, df_max_lim=0.75, df_sh=0.9)


def test_parameter_validation():
    with pytest.raises(InvalidParameterError):
        make_params(r=0.0)
    with pytest.raises(InvalidParameterError):
        make_params(k_n=1.5)
    with pytest.raises(InvalidParameterError):
        make_params(t_r=-1.0)
    with pytest.raises(InvalidParameterError):
        make_params(s_n=0.0)


def test_derived_properties():
    p = make_params()
    assert p.k_g == pytest.approx(20.0)
    assert p.pfr_capacity_mw == pytest.approx(160.0)
    assert p.effective_p_g == pytest.approx(2000.0)
    assert make_params(p_g=1200.0).effective_p_g == pytest.approx(1200.0)
    assert math.isfinite(p.k_g)
