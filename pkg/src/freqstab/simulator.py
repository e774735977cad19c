"""Fixed-step time-domain oracle for the aggregated frequency-response loop.

Integrates the swing state together with a reheat governor (droop R, fast
fraction F_H, reheat constant T_R) whose output is clamped to the primary
reserve ceiling, plus frequency damping from load and converter regulation.
The converter damping branch can be routed through a configurable first-order
lag (SystemParameters.renewable_lag_s); with the lag at zero the damping
collapses to K_Lsys times the deviation exactly.

Everything is computed in per-unit on (s_n, f_n) with classic fourth-order
Runge-Kutta at a fixed step, so runs are bit-reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateWeightsError, InvalidParameterError, UnstableIntegrationError
from .estimator import NetworkSnapshot, ResponseSet
from .model import SystemParameters, derive_aggregates

# Deviations beyond this magnitude (Hz) abort integration as non-physical.
_BLOWUP_HZ = 5.0


@dataclass(frozen=True)
class StepDisturbance:
    """Sustained power deficit appearing instantaneously at t0."""

    t0_s: float
    dp0_mw: float

    def power_mw(self, t: float) -> float:
        return self.dp0_mw if t >= self.t0_s else 0.0


@dataclass(frozen=True)
class RampDisturbance:
    """Deficit growing linearly from t0 for duration_s, then holding."""

    t0_s: float
    k_mw_per_s: float
    duration_s: float

    def power_mw(self, t: float) -> float:
        if t < self.t0_s:
            return 0.0
        return self.k_mw_per_s * min(t - self.t0_s, self.duration_s)


@dataclass(frozen=True)
class ShortTermDisturbance:
    """Full-depth deficit for fault_duration_s, then linear recovery.

    The deficit shrinks at recovery_mw_per_s after clearance until it reaches
    zero, mirroring staged active-power ramp-back of a tripped plant.
    """

    t0_s: float
    dp0_mw: float
    fault_duration_s: float
    recovery_mw_per_s: float

    def power_mw(self, t: float) -> float:
        if t < self.t0_s:
            return 0.0
        clear = self.t0_s + self.fault_duration_s
        if t < clear:
            return self.dp0_mw
        sign = 1.0 if self.dp0_mw >= 0 else -1.0
        residual = abs(self.dp0_mw) - self.recovery_mw_per_s * (t - clear)
        return sign * max(residual, 0.0)


Disturbance = StepDisturbance | RampDisturbance | ShortTermDisturbance


@dataclass(frozen=True)
class Scenario:
    """A complete simulation-ready case: operating point, injection, grid of time."""

    params: SystemParameters
    disturbance: Disturbance
    horizon_s: float
    dt_s: float
    deadband_hz: float = 0.0  # hard activation threshold of the droop path

    def __post_init__(self):
        if self.disturbance.t0_s < 0:
            raise InvalidParameterError("disturbance start must be non-negative")
        if self.horizon_s <= self.disturbance.t0_s:
            raise InvalidParameterError("horizon must extend beyond the disturbance start")
        if self.dt_s <= 0:
            raise InvalidParameterError("integration step must be positive")
        if self.deadband_hz < 0:
            raise InvalidParameterError("deadband must be non-negative")


@dataclass
class SimTrace:
    """Sampled trajectory of the simulated system (engineering units)."""

    times: np.ndarray        # s
    df: np.ndarray           # signed frequency deviation (Hz)
    p_mech: np.ndarray       # clamped governor-turbine output (MW)
    p_dist: np.ndarray       # injected disturbance power (MW)
    p_load_damp: np.ndarray  # damping-channel power: load + converter regulation (MW)
    pfr_saturated_at: float | None = None
    meta: dict = field(default_factory=dict)


def simulate(s: Scenario) -> SimTrace:
    """Integrate the scenario and sample every state at the fixed step."""
    p = s.params
    d = derive_aggregates(p)
    r, f_h, t_r, t_j = p.r, p.f_h, p.t_r, d.t_j
    k_l, k_nw = p.k_l, p.k_n * p.k_w
    tau_w = p.renewable_lag_s
    fd_pu = s.deadband_hz / p.f_n
    cap = p.pfr_capacity_mw / p.s_n
    dt = s.dt_s
    n = int(round(s.horizon_s / dt)) + 1
    blowup = _BLOWUP_HZ / p.f_n

    dist = s.disturbance.power_mw
    s_n = p.s_n

    times = np.empty(n)
    df = np.empty(n)
    p_mech = np.empty(n)
    p_dist = np.empty(n)
    p_damp = np.empty(n)
    saturated_at: float | None = None

    f = 0.0   # frequency deviation (pu of f_n)
    xr = 0.0  # reheat low-pass state of the governor (pu)
    xw = 0.0  # lagged deviation seen by the converter damping branch (pu)

    def deriv(t: float, f: float, xr: float, xw: float):
        u = f if abs(f) >= fd_pu else 0.0
        raw = -(f_h * u + xr) / r
        pm = raw if -cap <= raw <= cap else math.copysign(cap, raw)
        pd = dist(t) / s_n
        if tau_w > 0.0:
            damp = k_l * f + k_nw * xw
            dxw = (f - xw) / tau_w
        else:
            damp = (k_l + k_nw) * f
            dxw = 0.0
        return (pm - pd - damp) / t_j, ((1.0 - f_h) * u - xr) / t_r, dxw, pm, raw, pd, damp

    half = 0.5 * dt
    sixth = dt / 6.0
    for i in range(n):
        t = i * dt
        dfdt, dxr, dxw, pm, raw, pd, damp = deriv(t, f, xr, xw)
        times[i] = t
        df[i] = f * p.f_n
        p_mech[i] = pm * s_n
        p_dist[i] = pd * s_n
        p_damp[i] = damp * s_n
        if saturated_at is None and abs(raw) > cap:
            saturated_at = t
        if abs(f) > blowup:
            raise UnstableIntegrationError(
                f"|deviation| exceeded {_BLOWUP_HZ} Hz at t = {t:.3f} s")
        if i == n - 1:
            break

        k1f, k1r, k1w = dfdt, dxr, dxw
        k2f, k2r, k2w = deriv(t + half, f + half * k1f, xr + half * k1r, xw + half * k1w)[:3]
        k3f, k3r, k3w = deriv(t + half, f + half * k2f, xr + half * k2r, xw + half * k2w)[:3]
        k4f, k4r, k4w = deriv(t + dt, f + dt * k3f, xr + dt * k3r, xw + dt * k3w)[:3]
        f += sixth * (k1f + 2.0 * (k2f + k3f) + k4f)
        xr += sixth * (k1r + 2.0 * (k2r + k3r) + k4r)
        xw += sixth * (k1w + 2.0 * (k2w + k3w) + k4w)

    return SimTrace(times=times, df=df, p_mech=p_mech, p_dist=p_dist,
                    p_load_damp=p_damp, pfr_saturated_at=saturated_at,
                    meta={"dt_s": dt, "deadband_hz": s.deadband_hz})


def find_overlimit_time(trace: SimTrace, df_max_hz: float) -> float | None:
    """First time |df| reaches df_max_hz, linearly interpolated; None if never."""
    if trace.times.size == 0:
        raise InvalidParameterError("empty trace")
    mag = np.abs(trace.df)
    idx = np.nonzero(mag >= df_max_hz)[0]
    if idx.size == 0:
        return None
    i = int(idx[0])
    if i == 0:
        return float(trace.times[0])
    t0, t1 = trace.times[i - 1], trace.times[i]
    m0, m1 = mag[i - 1], mag[i]
    if m1 == m0:
        return float(t1)
    return float(t0 + (df_max_hz - m0) * (t1 - t0) / (m1 - m0))


def synthesize_generator_responses(s: Scenario, split,
                                   noise_sigma_mw: float = 0.0,
                                   seed: int | None = None,
                                   include_frequency: bool = True,
                                   trace: SimTrace | None = None) -> ResponseSet:
    """Split the injected disturbance power into per-generator response traces.

    `split` is either a NetworkSnapshot (shares proportional to the
    synchronizing coefficients U_p*E_i*B_ip*cos(delta_ip)) or a plain mapping
    of generator id to non-negative weight.  The noise-free traces sum to the
    injected power exactly; optional Gaussian noise (MW, per generator) is
    added on top with a seeded generator for reproducibility.  Frequency
    series, when requested, replicate the simulated system deviation.
    """
    if isinstance(split, NetworkSnapshot):
        weights = split.synchronizing_weights()
    else:
        weights = dict(split)
    if not weights:
        raise DegenerateWeightsError("no generators in split")
    if any(w < 0 for w in weights.values()):
        raise DegenerateWeightsError("negative split weight")
    total = float(sum(weights.values()))
    if total <= 0.0:
        raise DegenerateWeightsError("split weights sum to zero")

    if include_frequency and trace is None:
        trace = simulate(s)
    if trace is not None:
        times = np.asarray(trace.times, dtype=float)
        p_total = np.asarray(trace.p_dist, dtype=float)
    else:
        n = int(round(s.horizon_s / s.dt_s)) + 1
        times = np.arange(n) * s.dt_s
        p_total = np.array([s.disturbance.power_mw(t) for t in times])

    rng = np.random.default_rng(seed)
    dpe = {}
    for name, w in weights.items():
        series = p_total * (w / total)
        if noise_sigma_mw > 0.0:
            series = series + rng.normal(0.0, noise_sigma_mw, size=series.shape)
        dpe[name] = series

    freq = None
    if include_frequency and trace is not None:
        freq = {name: np.array(trace.df, dtype=float) for name in weights}
    return ResponseSet(sample_times=times, per_generator_dpe=dpe,
                       per_generator_frequency=freq)
