"""Report rendering: delimited trace/response files, canonical JSON, figures.

All JSON output is byte-reproducible (sorted keys, fixed indentation, no
timestamps); figures render through the Agg backend so reports work headless.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be pinned first)
import numpy as np  # noqa: E402

from .estimator import ResponseSet  # noqa: E402
from .model import Thresholds  # noqa: E402
from .simulator import SimTrace  # noqa: E402

TRACE_COLUMNS = ("time", "df", "p_mech", "p_dist", "p_load_damp")


def write_json(obj, path: str | Path) -> None:
    """Serialize obj deterministically (sorted keys, indent 2, newline EOF)."""
    path = Path(path)
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def write_trace_csv(trace: SimTrace, path: str | Path) -> None:
    """Write a simulated trajectory as CSV with the canonical column set."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_COLUMNS)
        for row in zip(trace.times, trace.df, trace.p_mech, trace.p_dist,
                       trace.p_load_damp):
            writer.writerow([repr(float(v)) for v in row])


def write_responses_csv(responses: ResponseSet, path: str | Path) -> None:
    """Write per-generator electrical-power responses (and frequency, if any).

    First column is time; one column per generator carries its power change
    in MW, and optional ``freq:<name>`` columns carry measured frequency.
    """
    path = Path(path)
    names = sorted(responses.per_generator_dpe)
    freq = responses.per_generator_frequency or {}
    freq_names = sorted(freq)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["time", *names, *(f"freq:{n}" for n in freq_names)])
        columns = [responses.per_generator_dpe[n] for n in names]
        columns += [freq[n] for n in freq_names]
        for i, t in enumerate(responses.sample_times):
            writer.writerow([repr(float(t))] +
                            [repr(float(col[i])) for col in columns])


def render_trace_figure(trace: SimTrace, path: str | Path,
                        thresholds: Thresholds | None = None,
                        title: str | None = None) -> None:
    """Two-panel study figure: frequency deviation and the power balance."""
    t = np.asarray(trace.times)
    fig, (ax_f, ax_p) = plt.subplots(2, 1, sharex=True, figsize=(8, 6))

    ax_f.plot(t, trace.df, color="tab:blue", lw=1.2, label="frequency deviation")
    if thresholds is not None:
        for lim, style, lab in ((thresholds.df_sh, ":", "detection threshold"),
                                (thresholds.df_max_lim, "--", "transient limit")):
            ax_f.axhline(-lim, color="tab:red", ls=style, lw=0.9, label=lab)
    ax_f.set_ylabel("deviation (Hz)")
    ax_f.legend(loc="best", fontsize=8)
    ax_f.grid(alpha=0.3)

    ax_p.plot(t, trace.p_dist, color="tab:orange", lw=1.2, label="disturbance")
    ax_p.plot(t, trace.p_mech, color="tab:green", lw=1.2, label="primary response")
    ax_p.plot(t, trace.p_load_damp, color="tab:purple", lw=1.0,
              label="load + converter damping")
    ax_p.set_xlabel("time (s)")
    ax_p.set_ylabel("power (MW)")
    ax_p.legend(loc="best", fontsize=8)
    ax_p.grid(alpha=0.3)

    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_responses_figure(responses: ResponseSet, path: str | Path,
                            dp_threshold_mw: float | None = None,
                            title: str | None = None) -> None:
    """Per-generator power responses with the aggregate overlaid."""
    t = np.asarray(responses.sample_times)
    fig, ax = plt.subplots(figsize=(8, 4.5))
    for name in sorted(responses.per_generator_dpe):
        ax.plot(t, responses.per_generator_dpe[name], lw=0.8, alpha=0.7,
                label=name)
    total = responses.total_power()
    ax.plot(t, total, color="black", lw=1.6, label="total")
    if dp_threshold_mw is not None:
        ax.axhline(dp_threshold_mw, color="tab:red", ls=":", lw=0.9)
        ax.axhline(-dp_threshold_mw, color="tab:red", ls=":", lw=0.9)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("electrical power change (MW)")
    if len(responses.per_generator_dpe) <= 8:
        ax.legend(loc="best", fontsize=8)
    ax.grid(alpha=0.3)
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
