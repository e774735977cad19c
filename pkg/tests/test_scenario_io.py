"""Scenario document parsing, validation, and bundled studies."""

import json

import pytest

from freqstab import (
    ParseError,
    RampDisturbance,
    SchemaError,
    StepDisturbance,
    bundle_to_dict,
    list_bundled,
    load_bundled,
    load_scenario,
    parse_bundle,
)

EXPECTED_BUNDLES = {
    "csee-fs-low-freq",
    "csee-fs-second-ramp",
    "csee-fs-minute-ramp",
    "csee-fs-short-term",
    "threshold-worked-example",
}


def _minimal_doc(**over):
    doc = {
        "name": "case",
        "system": {"f_n": 50.0, "s_n": 1000.0, "h": 4.0, "k_n": 0.0,
                   "k_v": 0.0, "k_l": 1.0, "k_w": 10.0, "r": 0.05,
                   "f_h": 0.3, "t_r": 10.0, "p_gn": 1000.0, "p_new": 1000.0,
                   "p_l0": 1000.0, "m": 0.06, "n": 0.1, "k_r": 2000.0},
        "thresholds": {"k1": 3.0, "t_dist": 0.5, "f_d": 0.033,
                       "df_ss_lim": 0.2, "df_max_lim": 0.75},
        "disturbance": {"type": "step", "t0_s": 1.0, "dp0_mw": 100.0},
        "simulation": {"horizon_s": 10.0, "dt_s": 0.001},
    }
    doc.update(over)
    return doc


def test_bundled_catalogue():
    assert set(list_bundled()) == EXPECTED_BUNDLES


def test_bundled_step_study_contents():
    b = load_bundled("csee-fs-low-freq")
    assert b.name == "csee-fs-low-freq"
    assert isinstance(b.scenario.disturbance, StepDisturbance)
    assert b.scenario.disturbance.dp0_mw == 690.0
    assert b.thresholds.dp_sh == 3.65
    assert b.thresholds.df_sh == 0.33
    assert b.params.s_n > 0


def test_bundled_ramp_study_contents():
    b = load_bundled("csee-fs-second-ramp")
    d = b.scenario.disturbance
    assert isinstance(d, RampDisturbance)
    assert d.k_mw_per_s == 60.0
    assert d.duration_s > (13.13 + d.t0_s)  # ramp outlives the predicted crossing


def test_unknown_bundled_name_lists_alternatives():
    with pytest.raises(FileNotFoundError) as exc:
        load_bundled("no-such-study")
    assert "csee-fs-low-freq" in str(exc.value)


@pytest.mark.parametrize("name", sorted(EXPECTED_BUNDLES))
def test_bundles_round_trip_through_plain_dicts(name):
    b = load_bundled(name)
    again = parse_bundle(bundle_to_dict(b), origin=name)
    assert again.scenario.params == b.scenario.params
    assert again.thresholds == b.thresholds
    assert again.scenario.disturbance == b.scenario.disturbance
    assert again.scenario.horizon_s == b.scenario.horizon_s
    assert again.scenario.dt_s == b.scenario.dt_s
    assert again.scenario.deadband_hz == b.scenario.deadband_hz


def test_derived_thresholds_of_the_worked_example():
    b = load_bundled("threshold-worked-example")
    assert b.thresholds.dp_sh == 1.5               # k1 * t_dist = 3 * 0.5
    assert abs(b.thresholds.df_sh - 0.3) < 5e-4    # reserve ceiling + dead band


def test_explicit_thresholds_win_over_derived_ones():
    doc = _minimal_doc()
    doc["thresholds"]["dp_sh"] = 99.0
    b = parse_bundle(doc)
    assert b.thresholds.dp_sh == 99.0


def test_deadband_defaults_to_the_detection_value():
    b = parse_bundle(_minimal_doc())
    assert b.scenario.deadband_hz == b.thresholds.f_d
    doc = _minimal_doc()
    doc["simulation"]["deadband_hz"] = 0.0
    assert parse_bundle(doc).scenario.deadband_hz == 0.0


def test_schema_violations_are_reported():
    doc = _minimal_doc()
    del doc["system"]
    with pytest.raises(SchemaError, match="missing keys"):
        parse_bundle(doc)

    doc = _minimal_doc(extra=1)
    with pytest.raises(SchemaError, match="unknown keys"):
        parse_bundle(doc)

    doc = _minimal_doc()
    doc["system"]["h"] = "four"
    with pytest.raises(SchemaError, match="must be a number"):
        parse_bundle(doc)

    doc = _minimal_doc()
    doc["system"]["h"] = True
    with pytest.raises(SchemaError, match="must be a number"):
        parse_bundle(doc)

    doc = _minimal_doc()
    doc["disturbance"] = {"type": "impulse"}
    with pytest.raises(SchemaError, match="disturbance.type"):
        parse_bundle(doc)

    doc = _minimal_doc()
    doc["disturbance"]["duration_s"] = 5.0
    with pytest.raises(SchemaError, match="unknown keys"):
        parse_bundle(doc)

    with pytest.raises(SchemaError):
        parse_bundle([1, 2, 3])

    doc = _minimal_doc(name="")
    with pytest.raises(SchemaError, match="name"):
        parse_bundle(doc)


def test_load_scenario_from_disk(tmp_path):
    path = tmp_path / "case.json"
    path.write_text(json.dumps(_minimal_doc()), encoding="utf-8")
    b = load_scenario(path)
    assert b.name == "case"
    assert b.scenario.disturbance.dp0_mw == 100.0


def test_malformed_json_reports_the_location(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"name": "x",\n  "oops"\n}', encoding="utf-8")
    with pytest.raises(ParseError) as exc:
        load_scenario(path)
    assert exc.value.row == 3
    assert exc.value.column == 1
    assert "row 3" in str(exc.value)
