"""Command-line entry point: reproducible ingest -> classify -> assess runs.

Subcommands
    simulate    integrate a scenario; write trace + synthesized responses
    classify    label a disturbance from response data
    assess      classify, then issue the stability verdict
    pipeline    full run: simulate/ingest, classify, assess, plots
    reproduce   recompute the bundled studies' headline tables

Exit codes: 0 success, 2 configuration/parse problems, 3 nothing to classify
(no onset, or no threshold ever crossed), 4 ambiguous classification.
Reports are byte-reproducible for a fixed config and seed (sorted keys, no
timestamps).
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .assessor import Assessment, assess, minute_deviation_hz
from .classifier import DisturbanceEstimate, DisturbanceLabel, classify
from .errors import (AmbiguousClassificationError, FreqstabError, NoOnsetError,
                     ParseError, SchemaError)
from .estimator import ResponseSet
from .model import derive_aggregates
from .report import (render_responses_figure, render_trace_figure,
                     write_json, write_responses_csv, write_trace_csv)
from .scenario_io import ScenarioBundle, bundle_to_dict, load_bundled, load_scenario
from .sfr import derive_sfr, ramp_response, step_response
from .simulator import (Scenario, ShortTermDisturbance, StepDisturbance,
                        RampDisturbance, SimTrace, find_overlimit_time,
                        simulate, synthesize_generator_responses)

# default synthesis split: four unequal coherent groups
DEFAULT_SPLIT = {"G1": 0.4, "G2": 0.3, "G3": 0.2, "G4": 0.1}


@dataclasses.dataclass
class RunConfig:
    """Everything one invocation needs; mirrors the CLI flags."""

    command: str
    scenario_path: str | None = None
    responses_path: str | None = None
    output_dir: Path = Path("out")
    format: str = "json"
    seed: int = 0
    noise_sigma_mw: float = 0.0
    noise_floor_mw: float | None = None   # None -> auto from noise_sigma_mw
    smooth_window_s: float | None = None  # None -> auto from noise_sigma_mw
    what: str = "tables"  # reproduce target


def _jsonable(obj):
    """Recursively coerce numpy scalars/arrays so json can serialize them."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def ingest_responses(path: str | Path) -> ResponseSet:
    """Read a per-generator response CSV into a validated ResponseSet.

    Layout: header ``time, <gen>, ..., freq:<gen>, ...``; power columns in MW,
    optional frequency columns in Hz.  Rejects duplicate headers, non-monotone
    timestamps, ragged rows, and non-numeric cells (with row/column location).
    """
    path = Path(path)
    with path.open("r", newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise SchemaError(f"{path}: empty responses file")
    header = [cell.strip() for cell in rows[0]]
    if not header or header[0] != "time":
        raise SchemaError(f"{path}: first column must be named 'time'")
    if len(set(header)) != len(header):
        raise SchemaError(f"{path}: duplicate column names")
    power_names = [h for h in header[1:] if not h.startswith("freq:")]
    freq_names = [h[len("freq:"):] for h in header[1:] if h.startswith("freq:")]
    if not power_names:
        raise SchemaError(f"{path}: no generator power columns")
    unknown = set(freq_names) - set(power_names)
    if unknown:
        raise SchemaError(f"{path}: frequency columns without a matching "
                          f"generator: {sorted(unknown)}")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")

    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:], start=2):  # file line numbers
        if len(row) != len(header):
            raise ParseError(f"{path}: expected {len(header)} cells, "
                             f"got {len(row)}", row=i)
        for j, cell in enumerate(row, start=1):
            try:
                data[i - 2, j - 1] = float(cell)
            except ValueError as exc:
                raise ParseError(f"{path}: non-numeric value {cell!r}",
                                 row=i, column=j) from exc

    times = data[:, 0]
    if np.any(np.diff(times) <= 0):
        raise SchemaError(f"{path}: time column must be strictly increasing "
                          "(duplicates or backwards steps found)")
    col = {name: data[:, k + 1] for k, name in enumerate(header[1:])}
    dpe = {name: col[name] for name in power_names}
    freq = {name: col[f"freq:{name}"] for name in freq_names} or None
    return ResponseSet(sample_times=times, per_generator_dpe=dpe,
                       per_generator_frequency=freq)


def _load_bundle(spec: str) -> ScenarioBundle:
    """Resolve a --scenario value: a file path, else a bundled study name."""
    p = Path(spec)
    if p.exists():
        return load_scenario(p)
    return load_bundled(spec)


def _classification_record(est: DisturbanceEstimate) -> dict:
    return _jsonable({
        "label": est.label.value,
        "onset_time_s": est.onset_time,
        "dp0_mw": est.dp0,
        "k_s_mw_per_s": est.k_s,
        "k_m_mw_per_s": est.k_m,
        "t1_s": est.t1,
        "fault_duration_s": est.fault_duration,
        "diagnostics": est.diagnostics,
    })


def _assessment_record(a: Assessment) -> dict:
    return _jsonable({
        "label": a.label.value,
        "dp_max1_mw": a.dp_max1,
        "dp_max2_mw": a.dp_max2,
        "dp_max3_mw": a.dp_max3,
        "dp_max_mw": a.dp_max,
        "eta": a.eta,
        "eta_pct": None if a.eta is None else 100.0 * a.eta,
        "t_m_s": a.t_m,
        "verdict": a.verdict.value,
    })


def _trace_summary(trace: SimTrace, bundle: ScenarioBundle) -> dict:
    df = np.asarray(trace.df)
    idx = int(np.argmax(np.abs(df)))
    return _jsonable({
        "peak_deviation_hz": float(df[idx]),
        "peak_deviation_time_s": float(trace.times[idx]),
        "final_deviation_hz": float(df[-1]),
        "pfr_saturated_at_s": trace.pfr_saturated_at,
        "overlimit_time_s": find_overlimit_time(
            trace, bundle.thresholds.df_max_lim),
    })


def _predicted_curve(est: DisturbanceEstimate, bundle: ScenarioBundle,
                     times: np.ndarray) -> np.ndarray:
    """Closed-form deviation for the classified label; NaN where undefined."""
    p = bundle.params
    d = derive_aggregates(p)
    out = np.full(times.shape, np.nan)
    rel = times - est.onset_time
    after = rel >= 0.0
    if est.label is DisturbanceLabel.STEP:
        sfr = derive_sfr(p, d)
        out[after] = step_response(sfr, p, est.dp0, rel[after])
    elif est.label is DisturbanceLabel.SECOND_SLOPE:
        sfr = derive_sfr(p, d)
        out[after] = ramp_response(sfr, p, est.k_s, rel[after])
    elif est.label is DisturbanceLabel.MINUTE_SLOPE:
        tail = rel >= est.t1
        out[tail] = [minute_deviation_hz(p, d, est.k_m, est.t1,
                                         bundle.thresholds.df_sh, t)
                     for t in rel[tail]]
    return out


def _write_plot_data(times, df_measured, df_predicted, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", "df_measured", "df_predicted"])
        for t, m, pr in zip(times, df_measured, df_predicted):
            writer.writerow([repr(float(t)), repr(float(m)),
                             "" if np.isnan(pr) else repr(float(pr))])


def _emit_stdout(record: dict, fmt: str) -> None:
    if fmt == "json":
        import json

        print(json.dumps(record, sort_keys=True, indent=2))
    else:
        writer = csv.writer(sys.stdout)
        writer.writerow(["key", "value"])
        for key in sorted(record):
            val = record[key]
            if isinstance(val, dict):
                for sub in sorted(val):
                    writer.writerow([f"{key}.{sub}", val[sub]])
            else:
                writer.writerow([key, val])


def _gather_inputs(cfg: RunConfig, bundle: ScenarioBundle):
    """Produce (responses, times, dp, df, trace) from file or synthesis."""
    trace = simulate(bundle.scenario)
    if cfg.responses_path is not None:
        responses = ingest_responses(cfg.responses_path)
        times = responses.sample_times
        df = responses.system_frequency()
        if df is None:
            # no measured frequency -> fall back to the scenario's own trace
            df = np.interp(times, trace.times, trace.df)
    else:
        responses = synthesize_generator_responses(
            bundle.scenario, DEFAULT_SPLIT,
            noise_sigma_mw=cfg.noise_sigma_mw, seed=cfg.seed, trace=trace)
        times = responses.sample_times
        df = responses.system_frequency()
    return responses, times, responses.total_power(), df, trace


def _conditioning(cfg: RunConfig, th, times, n_gen: int) -> tuple[float | None, float]:
    """Resolve (onset floor MW, smoothing window s) for classification.

    Explicit flags win.  Otherwise --noise-sigma declares the per-generator
    noise level (whether injected here or present in ingested data): the
    power trace is smoothed over 0.1 s and the onset floor raised to five
    times the post-smoothing noise of the summed trace, capped below the
    power threshold so detection can still fire.  Clean runs keep the
    classifier defaults.
    """
    window = cfg.smooth_window_s
    floor = cfg.noise_floor_mw
    if window is None:
        window = 0.1 if cfg.noise_sigma_mw > 0.0 else 0.0
    if floor is None and cfg.noise_sigma_mw > 0.0:
        times = np.asarray(times, dtype=float)
        dt = float(np.median(np.diff(times))) if times.size > 1 else 0.0
        samples = max(1, int(round(window / dt))) if dt > 0 else 1
        sigma_sum = cfg.noise_sigma_mw * math.sqrt(max(1, n_gen))
        floor = max(th.dp_sh / 10.0,
                    min(5.0 * sigma_sum / math.sqrt(samples), 0.8 * th.dp_sh))
    return floor, window


def _base_report(cfg: RunConfig, bundle: ScenarioBundle) -> dict:
    return {
        "version": __version__,
        "command": cfg.command,
        "format": cfg.format,
        "seed": cfg.seed,
        "noise_sigma_mw": cfg.noise_sigma_mw,
        "scenario": bundle_to_dict(bundle),
    }


def _cmd_simulate(cfg: RunConfig) -> int:
    bundle = _load_bundle(cfg.scenario_path)
    trace = simulate(bundle.scenario)
    responses = synthesize_generator_responses(
        bundle.scenario, DEFAULT_SPLIT, noise_sigma_mw=cfg.noise_sigma_mw,
        seed=cfg.seed, trace=trace)
    out = cfg.output_dir
    write_trace_csv(trace, out / "trace.csv")
    write_responses_csv(responses, out / "responses.csv")
    render_trace_figure(trace, out / "trace.png", thresholds=bundle.thresholds,
                        title=bundle.name)
    render_responses_figure(responses, out / "responses.png",
                            dp_threshold_mw=bundle.thresholds.dp_sh,
                            title=bundle.name)
    report = _base_report(cfg, bundle)
    report["simulation"] = _trace_summary(trace, bundle)
    report["files"] = {"trace": "trace.csv", "responses": "responses.csv",
                       "trace_figure": "trace.png",
                       "responses_figure": "responses.png"}
    write_json(report, out / "report.json")
    _emit_stdout(report["simulation"], cfg.format)
    return 0


def _cmd_classify(cfg: RunConfig, with_assessment: bool) -> int:
    bundle = _load_bundle(cfg.scenario_path)
    responses, times, dp, df, trace = _gather_inputs(cfg, bundle)
    floor, window = _conditioning(cfg, bundle.thresholds, times,
                                  len(responses.per_generator_dpe))
    est = classify(times, dp, df, bundle.thresholds, bundle.params,
                   noise_floor_mw=floor, smooth_window_s=window)
    if est is None:
        print("nothing to classify: onset found but no threshold crossed",
              file=sys.stderr)
        return 3
    report = _base_report(cfg, bundle)
    report["classification"] = _classification_record(est)
    record = report["classification"]
    if with_assessment:
        verdict = assess(est, bundle.params, bundle.thresholds)
        report["assessment"] = _assessment_record(verdict)
        record = report["assessment"]
    name = "assessment.json" if with_assessment else "classification.json"
    write_json(report, cfg.output_dir / name)
    _emit_stdout(record, cfg.format)
    return 0


def run_pipeline(cfg: RunConfig) -> int:
    """Full study: simulate/ingest, classify, assess, emit report + plots."""
    bundle = _load_bundle(cfg.scenario_path)
    responses, times, dp, df, trace = _gather_inputs(cfg, bundle)
    floor, window = _conditioning(cfg, bundle.thresholds, times,
                                  len(responses.per_generator_dpe))
    est = classify(times, dp, df, bundle.thresholds, bundle.params,
                   noise_floor_mw=floor, smooth_window_s=window)
    if est is None:
        print("nothing to classify: onset found but no threshold crossed",
              file=sys.stderr)
        return 3
    verdict = assess(est, bundle.params, bundle.thresholds)

    out = cfg.output_dir
    predicted = _predicted_curve(est, bundle, np.asarray(times))
    write_trace_csv(trace, out / "trace.csv")
    write_responses_csv(responses, out / "responses.csv")
    _write_plot_data(times, df, predicted, out / "plot_data.csv")
    render_trace_figure(trace, out / "trace.png", thresholds=bundle.thresholds,
                        title=bundle.name)
    render_responses_figure(responses, out / "responses.png",
                            dp_threshold_mw=bundle.thresholds.dp_sh,
                            title=bundle.name)

    report = _base_report(cfg, bundle)
    report["classification"] = _classification_record(est)
    report["assessment"] = _assessment_record(verdict)
    report["simulation"] = _trace_summary(trace, bundle)
    report["files"] = {"trace": "trace.csv", "responses": "responses.csv",
                       "plot_data": "plot_data.csv",
                       "trace_figure": "trace.png",
                       "responses_figure": "responses.png"}
    write_json(report, out / "report.json")
    _emit_stdout({**report["classification"], **report["assessment"]},
                 cfg.format)
    return 0


def _sim_variant(bundle: ScenarioBundle, disturbance) -> SimTrace:
    sc = bundle.scenario
    return simulate(Scenario(params=sc.params, disturbance=disturbance,
                             horizon_s=sc.horizon_s, dt_s=sc.dt_s,
                             deadband_hz=sc.deadband_hz))


def _reproduce_tables(cfg: RunConfig) -> dict:
    from .assessor import (minute_overlimit_time, short_term_critical_power,
                           step_critical_power_ss,
                           step_critical_power_transient)

    tables: dict = {"version": __version__}

    # critical dip power vs duration; peak deviation under the bundled dip
    b = load_bundled("csee-fs-short-term")
    rows = []
    for dur in (0.4, 0.5, 0.6):
        crit = short_term_critical_power(b.params, dur,
                                         b.thresholds.df_max_lim)
        dist = b.scenario.disturbance
        tr = _sim_variant(b, ShortTermDisturbance(
            t0_s=dist.t0_s, dp0_mw=dist.dp0_mw, fault_duration_s=dur,
            recovery_mw_per_s=dist.recovery_mw_per_s))
        rows.append({"fault_duration_s": dur,
                     "critical_power_mw": crit,
                     "simulated_peak_deviation_hz": float(np.min(tr.df))})
    tables["short_term_critical_power"] = rows

    # step margins and the simulated deviations behind them
    b = load_bundled("csee-fs-low-freq")
    m1, m2 = step_critical_power_ss(b.params, b.thresholds.df_ss_lim)
    sfr = derive_sfr(b.params, derive_aggregates(b.params))
    m3 = step_critical_power_transient(sfr, b.params,
                                       b.thresholds.df_max_lim)
    dp_max = min(m1, m2, m3)
    rows = []
    for dp0 in (350.0, 520.0, 690.0):
        tr = _sim_variant(b, StepDisturbance(
            t0_s=b.scenario.disturbance.t0_s, dp0_mw=dp0))
        rows.append({"dp0_mw": dp0,
                     "eta_pct": 100.0 * (dp_max - dp0) / dp_max,
                     "simulated_peak_deviation_hz": float(np.min(tr.df)),
                     "simulated_final_deviation_hz": float(tr.df[-1])})
    tables["step_margins"] = {
        "dp_max1_mw": m1, "dp_max2_mw": m2, "dp_max3_mw": m3,
        "dp_max_mw": dp_max, "rows": rows}

    # second-level ramp: predicted vs simulated over-limit time
    b = load_bundled("csee-fs-second-ramp")
    from .sfr import ramp_overlimit_time

    dist = b.scenario.disturbance
    predicted = ramp_overlimit_time(sfr=derive_sfr(b.params,
                                                   derive_aggregates(b.params)),
                                    p=b.params, k_s_mw_per_s=dist.k_mw_per_s,
                                    df_max_hz=b.thresholds.df_max_lim)
    tr = simulate(b.scenario)
    simulated = find_overlimit_time(tr, b.thresholds.df_max_lim) - dist.t0_s
    tables["second_ramp_overlimit"] = {
        "k_mw_per_s": dist.k_mw_per_s,
        "predicted_s": predicted, "simulated_s": simulated,
        "relative_error_pct": 100.0 * abs(predicted - simulated) / simulated}

    # minute-level ramp: classify the simulated trace, predict the crossing
    b = load_bundled("csee-fs-minute-ramp")
    tr = simulate(b.scenario)
    est = classify(tr.times, tr.p_dist, tr.df, b.thresholds, b.params)
    t_pred = minute_overlimit_time(b.params, derive_aggregates(b.params),
                                   est.k_m, est.t1, b.thresholds.df_sh,
                                   b.thresholds.df_max_lim)
    t_sim = find_overlimit_time(tr, b.thresholds.df_max_lim) - est.onset_time
    tables["minute_ramp_overlimit"] = {
        "k_m_mw_per_s": est.k_m, "t1_s": est.t1,
        "predicted_s": t_pred, "simulated_s": t_sim,
        "relative_error_pct": 100.0 * abs(t_pred - t_sim) / t_sim}
    return _jsonable(tables)


def _cmd_reproduce(cfg: RunConfig) -> int:
    tables = _reproduce_tables(cfg)
    out = cfg.output_dir
    write_json(tables, out / "tables.json")
    with (out / "tables.csv").open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["table", "key", "value"])
        for tname in sorted(tables):
            entry = tables[tname]
            if isinstance(entry, dict):
                flat = []
                for k in sorted(entry):
                    v = entry[k]
                    if isinstance(v, list):
                        for idx, row in enumerate(v):
                            flat += [(f"{k}[{idx}].{rk}", row[rk])
                                     for rk in sorted(row)]
                    else:
                        flat.append((k, v))
                writer.writerows([tname, k, v] for k, v in flat)
            elif isinstance(entry, list):
                for idx, row in enumerate(entry):
                    writer.writerows([tname, f"[{idx}].{rk}", row[rk]]
                                     for rk in sorted(row))
            else:
                writer.writerow([tname, "", entry])
    _emit_stdout({"written": ["tables.json", "tables.csv"]}, cfg.format)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="freqstab",
        description="Classify active-power disturbances from generator "
                    "responses and judge frequency-stability limits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, scenario_required=True):
        sp.add_argument("--scenario", required=scenario_required,
                        help="scenario JSON path, or a bundled study name")
        sp.add_argument("--out", default="out",
                        help="output directory (created if missing)")
        sp.add_argument("--format", choices=("json", "csv"), default="json",
                        help="stdout record format")
        sp.add_argument("--seed", type=int, default=0,
                        help="RNG seed for synthesized measurement noise")
        sp.add_argument("--noise-sigma", type=float, default=0.0,
                        metavar="MW", help="per-generator noise level")

    def classifying(sp, responses_help):
        sp.add_argument("--responses", help=responses_help)
        sp.add_argument("--noise-floor", type=float, metavar="MW",
                        help="onset detection floor (default: auto from "
                             "--noise-sigma, else a tenth of the power "
                             "threshold)")
        sp.add_argument("--smooth-window", type=float, metavar="S",
                        help="centered averaging window over the power trace "
                             "(default: 0.1 when --noise-sigma > 0, else off)")

    sp = sub.add_parser("simulate", help="integrate a scenario and export "
                                         "trace + synthesized responses")
    common(sp)
    sp = sub.add_parser("classify", help="label the disturbance")
    common(sp)
    classifying(sp, "per-generator response CSV "
                    "(default: synthesized from scenario)")
    sp = sub.add_parser("assess", help="classify and issue the verdict")
    common(sp)
    classifying(sp, "per-generator response CSV")
    sp = sub.add_parser("pipeline", help="simulate/ingest -> classify -> "
                                         "assess -> report with plot data")
    common(sp)
    classifying(sp, "per-generator response CSV")
    sp = sub.add_parser("reproduce", help="recompute bundled-study tables "
                                          "with predicted-vs-simulated errors")
    sp.add_argument("what", choices=("tables",))
    common(sp, scenario_required=False)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
    except SystemExit as exc:  # argparse errors -> config exit code
        return 0 if exc.code in (0, None) else 2

    cfg = RunConfig(command=args.command,
                    scenario_path=getattr(args, "scenario", None),
                    responses_path=getattr(args, "responses", None),
                    output_dir=Path(args.out),
                    format=args.format,
                    seed=args.seed,
                    noise_sigma_mw=args.noise_sigma,
                    noise_floor_mw=getattr(args, "noise_floor", None),
                    smooth_window_s=getattr(args, "smooth_window", None),
                    what=getattr(args, "what", "tables"))
    try:
        cfg.output_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        print(f"error: cannot create output directory: {exc}", file=sys.stderr)
        return 2

    try:
        if cfg.command == "simulate":
            return _cmd_simulate(cfg)
        if cfg.command == "classify":
            return _cmd_classify(cfg, with_assessment=False)
        if cfg.command == "assess":
            return _cmd_classify(cfg, with_assessment=True)
        if cfg.command == "pipeline":
            return run_pipeline(cfg)
        if cfg.command == "reproduce":
            return _cmd_reproduce(cfg)
        print(f"error: unknown command {cfg.command!r}", file=sys.stderr)
        return 2
    except NoOnsetError as exc:
        print(f"no onset: {exc}", file=sys.stderr)
        return 3
    except AmbiguousClassificationError as exc:
        print(f"ambiguous: {exc}", file=sys.stderr)
        return 4
    except (SchemaError, ParseError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FreqstabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
