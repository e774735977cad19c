"""Disturbance-type decision procedure over measured power/frequency traces.

Decision order mirrors the screening logic: find the onset, check whether the
power threshold is crossed within the distribution window (fast branch:
step / second-level ramp / short-term), otherwise watch for the frequency
threshold (minute-level ramp).  If the frequency threshold is reached no
later than the power threshold, the evidence is contradictory and an
ambiguous-classification error reports both candidates.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import AmbiguousClassificationError, InvalidParameterError, NoOnsetError
from .estimator import anchored_slope, minute_slope_at_threshold
from .model import SystemParameters, Thresholds

# Watch window (s) for the return-to-zero that marks a short-term event.
SHORT_TERM_WATCH_S = 2.0
# A trace has "returned" once |dP| falls below this fraction of its peak.
RETURN_FRACTION = 0.05
# Samples at or above this fraction of the peak count as the fault plateau.
PLATEAU_FRACTION = 0.95
# Residual ratio below which a line explains the window better than a constant.
RESIDUAL_RATIO = 0.5
# A threshold crossing must hold for this long (s) to rule out noise blips;
# the reported crossing time is still the first sample above the threshold.
CROSSING_PERSIST_S = 0.1
CROSSING_PERSIST_FRACTION = 0.8


class DisturbanceLabel(enum.Enum):
    """The four disturbance categories."""

    SHORT_TERM = "ShortTerm"
    STEP = "Step"
    SECOND_SLOPE = "SecondSlope"
    MINUTE_SLOPE = "MinuteSlope"


@dataclass
class DisturbanceEstimate:
    """Label plus the intensity fields relevant to it (others stay None)."""

    label: DisturbanceLabel
    onset_time: float            # s
    dp0: float | None = None     # MW (ShortTerm / Step)
    k_s: float | None = None     # MW/s (SecondSlope)
    k_m: float | None = None     # MW/s (MinuteSlope)
    t1: float | None = None      # s from onset to frequency-threshold crossing
    fault_duration: float | None = None  # s (ShortTerm)
    diagnostics: dict = field(default_factory=dict)


def _sustained_crossing(times: np.ndarray, mask: np.ndarray) -> float | None:
    """First time the mask holds for two consecutive samples."""
    hits = np.nonzero(mask[:-1] & mask[1:])[0]
    if hits.size == 0:
        return None
    return float(times[int(hits[0])])


def _running_mean(values: np.ndarray, half: int) -> np.ndarray:
    """Centered running mean; the window shrinks near the trace edges."""
    n = values.size
    csum = np.concatenate(([0.0], np.cumsum(values)))
    idx = np.arange(n)
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, n)
    return (csum[hi] - csum[lo]) / (hi - lo)


def _persistent_crossing(times: np.ndarray, above: np.ndarray,
                         eligible: np.ndarray) -> float | None:
    """First eligible above-threshold sample that stays mostly above.

    A candidate must have at least CROSSING_PERSIST_FRACTION of the samples in
    the following CROSSING_PERSIST_S seconds (minimum two samples, truncated at
    the trace end) also above the threshold.  Clean crossings pass at the very
    first sample; isolated noise excursions do not.
    """
    candidates = np.nonzero(above & eligible)[0]
    if candidates.size == 0:
        return None
    n = above.size
    if n >= 2:
        dt = float(np.median(np.diff(times)))
        persist = max(2, int(round(CROSSING_PERSIST_S / dt)) if dt > 0 else 2)
    else:
        return None
    counts = np.concatenate(([0], np.cumsum(above)))
    for i in candidates:
        j = min(n, int(i) + persist)
        width = j - int(i)
        if width < 2 and int(i) > 0:
            # Not enough trailing trace to confirm; fall back to the pair rule.
            if above[i] and (i + 1 < n and above[i + 1]):
                return float(times[int(i)])
            continue
        if counts[j] - counts[int(i)] >= math.ceil(CROSSING_PERSIST_FRACTION * width):
            return float(times[int(i)])
    return None


def detect_onset(times, dp_mw, noise_floor_mw: float) -> float:
    """First time |dP| exceeds the noise floor for two consecutive samples."""
    times = np.asarray(times, dtype=float)
    dp = np.asarray(dp_mw, dtype=float)
    if times.size == 0:
        raise NoOnsetError("empty trace")
    if noise_floor_mw < 0:
        raise InvalidParameterError("noise floor must be non-negative")
    onset = _sustained_crossing(times, np.abs(dp) > noise_floor_mw)
    if onset is None:
        raise NoOnsetError(f"|dP| never exceeded {noise_floor_mw} MW for two samples")
    return onset


def _fit_window_stats(times, dp, t_a, t_b):
    """Anchored slope plus line-vs-constant residuals over [t_a, t_b]."""
    k = anchored_slope(times, dp, t_a, t_b)
    mask = (times >= t_a) & (times <= t_b)
    tw, yw = times[mask], dp[mask]
    y0 = float(np.interp(t_a, times, dp))
    rss_line = float(np.sum((yw - (y0 + k * (tw - t_a))) ** 2))
    rss_const = float(np.sum((yw - np.mean(yw)) ** 2))
    return k, rss_line, rss_const


def classify(times, dp_mw, df_hz, th: Thresholds, p: SystemParameters,
             noise_floor_mw: float | None = None,
             smooth_window_s: float = 0.0) -> DisturbanceEstimate | None:
    """Label the disturbance in a time-aligned (dP, df) trace pair.

    df_hz may be None when no frequency measurements exist; the minute-level
    branch (and the ambiguity check) then never triggers.  Returns None when
    an onset exists but neither threshold is ever crossed — a fluctuation too
    small to classify.

    smooth_window_s > 0 runs a centered moving average of that width over the
    power trace before any threshold logic — the defence of choice when
    per-sample noise approaches the onset floor.  A centered mean reproduces
    linear segments exactly, so ramp crossing times stay unbiased; a step
    acquires a rise one window wide, so keep the window well under t_dist.
    """
    times = np.asarray(times, dtype=float)
    dp = np.asarray(dp_mw, dtype=float)
    df = None if df_hz is None else np.asarray(df_hz, dtype=float)
    if df is not None and df.shape != times.shape:
        raise InvalidParameterError("dP and df traces must share the sample grid")
    if smooth_window_s < 0:
        raise InvalidParameterError("smoothing window must be non-negative")
    blur = 0.0
    if smooth_window_s > 0 and times.size > 1:
        dt = float(np.median(np.diff(times)))
        half = int(round(0.5 * smooth_window_s / dt)) if dt > 0 else 0
        if half > 0:
            dp = _running_mean(dp, half)
            blur = (2 * half + 1) * dt
    if noise_floor_mw is None:
        noise_floor_mw = th.dp_sh / 10.0

    onset = detect_onset(times, dp, noise_floor_mw)

    in_window = (times >= onset) & (times <= onset + th.t_dist)
    t_p = _persistent_crossing(times, np.abs(dp) > th.dp_sh, in_window)
    t_f = None
    if df is not None:
        t_f = _persistent_crossing(times, np.abs(df) >= th.df_sh, times >= onset)

    diag = {
        "onset_time_s": onset,
        "noise_floor_mw": float(noise_floor_mw),
        "smooth_window_s": float(smooth_window_s),
        "power_threshold_crossing_s": t_p,
        "frequency_threshold_crossing_s": t_f,
        "dp_sh_mw": th.dp_sh,
        "df_sh_hz": th.df_sh,
    }

    if t_p is not None and t_f is not None and t_f <= t_p:
        fast_label = _fast_branch_label(times, dp, onset, th)
        raise AmbiguousClassificationError(
            "frequency threshold crossed no later than the power threshold",
            candidates=(fast_label.value, DisturbanceLabel.MINUTE_SLOPE.value))

    if t_p is not None:
        return _classify_fast(times, dp, onset, t_p, th, diag, blur)
    if t_f is not None:
        t1 = t_f - onset
        k_m = minute_slope_at_threshold(p, th.df_sh, t1)
        try:
            k_fit, _, _ = _fit_window_stats(times, dp, onset, min(float(times[-1]), t_f))
        except Exception:
            k_fit = None
        diag["measured_slope_mw_per_s"] = k_fit
        return DisturbanceEstimate(label=DisturbanceLabel.MINUTE_SLOPE,
                                   onset_time=onset, k_m=k_m, t1=t1,
                                   diagnostics=diag)
    return None


def _fast_branch_label(times, dp, onset, th) -> DisturbanceLabel:
    """Label the power-threshold branch without building the full estimate."""
    if _short_term_extent(times, dp, onset) is not None:
        return DisturbanceLabel.SHORT_TERM
    k, rss_line, rss_const = _fit_window_stats(
        times, dp, onset, min(float(times[-1]), onset + th.t_dist))
    if _is_time_varying(k, rss_line, rss_const, th.k1):
        return DisturbanceLabel.SECOND_SLOPE
    return DisturbanceLabel.STEP


def _is_time_varying(k: float, rss_line: float, rss_const: float, k1: float) -> bool:
    ratio = rss_line / rss_const if rss_const > 0.0 else 1.0
    return abs(k) > k1 / 2.0 and ratio < RESIDUAL_RATIO


def _short_term_extent(times, dp, onset):
    """Plateau (start, end, peak) if |dP| returns near zero inside the watch."""
    watch = (times >= onset) & (times <= onset + SHORT_TERM_WATCH_S)
    tw, yw = times[watch], np.abs(dp[watch])
    if tw.size < 3:
        return None
    i_peak = int(np.argmax(yw))
    peak = float(yw[i_peak])
    if peak <= 0.0:
        return None
    returned = np.nonzero(yw[i_peak:] <= RETURN_FRACTION * peak)[0]
    if returned.size == 0:
        return None
    plateau = np.nonzero(yw >= PLATEAU_FRACTION * peak)[0]
    t_start, t_end = float(tw[int(plateau[0])]), float(tw[int(plateau[-1])])
    return t_start, t_end, peak


def _classify_fast(times, dp, onset, t_p, th, diag,
                   blur: float = 0.0) -> DisturbanceEstimate:
    extent = _short_term_extent(times, dp, onset)
    if extent is not None:
        t_start, t_end, peak = extent
        plateau = (times >= t_start) & (times <= t_end)
        dp0 = float(np.mean(dp[plateau]))
        # Plateau endpoints are sample-aligned; one sample period of width is
        # hidden on the trailing edge.
        step = float(np.median(np.diff(times))) if times.size > 1 else 0.0
        duration = t_end - t_start + step
        diag["plateau_peak_mw"] = peak
        return DisturbanceEstimate(label=DisturbanceLabel.SHORT_TERM,
                                   onset_time=onset, dp0=dp0,
                                   fault_duration=duration, diagnostics=diag)

    t_b = min(float(times[-1]), onset + th.t_dist)
    k, rss_line, rss_const = _fit_window_stats(times, dp, onset, t_b)
    diag["fitted_slope_mw_per_s"] = k
    diag["rss_line"] = rss_line
    diag["rss_const"] = rss_const
    if _is_time_varying(k, rss_line, rss_const, th.k1):
        return DisturbanceEstimate(label=DisturbanceLabel.SECOND_SLOPE,
                                   onset_time=onset, k_s=k, diagnostics=diag)

    # Skip the averaging blur (if any) so a smoothed step edge cannot drag
    # the settle-window mean below the true plateau.
    settle = (times >= t_p + blur) & (times <= t_p + blur + th.t_dist)
    dp0 = float(np.mean(dp[settle])) if np.any(settle) else float(
        np.interp(t_p, times, dp))
    return DisturbanceEstimate(label=DisturbanceLabel.STEP, onset_time=onset,
                               dp0=dp0, diagnostics=diag)
