"""Stability verdicts: critical disturbance powers, safety margin, over-limit time.

Each disturbance label has its own criterion.  Short-term events are judged by
a quadratic energy balance over the dip-and-recovery episode; steps by the
minimum of two steady-state criticals and one transient critical; both slope
types by the time remaining until the deviation limit is reached.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .classifier import DisturbanceEstimate, DisturbanceLabel
from .errors import InfeasibleError, InvalidParameterError, NoConvergenceError
from .model import DerivedAggregates, SystemParameters, Thresholds, derive_aggregates
from .sfr import SfrDerived, derive_sfr, ramp_overlimit_time, step_nadir, step_shape


class Verdict(enum.Enum):
    """Outcome of a stability assessment."""

    STABLE = "Stable"
    STEADY_STATE_VIOLATION = "SteadyStateViolation"
    TRANSIENT_VIOLATION = "TransientViolation"
    BOTH_VIOLATED = "BothViolated"
    OVER_LIMIT_AT = "OverLimitAt"


@dataclass(frozen=True)
class Assessment:
    """Critical powers, margin, and over-limit time for one classified event.

    Only the fields meaningful for the label are populated; dp_max is the
    binding critical power for power-quantified labels, t_m the predicted
    limit-crossing time for slope labels.
    """

    label: DisturbanceLabel
    dp_max1: float | None  # steady-state critical, unconstrained reserves (MW)
    dp_max2: float | None  # steady-state critical, reserve-limited (MW)
    dp_max3: float | None  # transient critical (MW)
    dp_max: float | None   # binding critical power (MW)
    eta: float | None      # safety margin (dP_max - dP0)/dP_max, dimensionless
    t_m: float | None      # over-limit time (s)
    verdict: Verdict


@dataclass(frozen=True)
class ShortTermEnergies:
    """Energy bookkeeping of a dip-and-recovery episode.

    All energies in MW*s; dt_prime is the recovery-to-nadir interval and
    dp0_res the residual disturbance power at the nadir (= K_R * dt_prime).
    """

    ds_p: float      # accumulated disturbance energy
    ds_l: float      # load-modulation energy
    w_k: float       # minimum kinetic-energy requirement
    dp0_res: float   # residual disturbance power at the nadir (MW)
    dt_prime: float  # recovery-to-nadir interval (s)


def safety_margin(dp_max_mw: float, dp0_mw: float) -> float:
    """Normalized headroom (dP_max - dP0)/dP_max; negative when exceeded."""
    if dp_max_mw <= 0:
        raise InvalidParameterError("critical power must be positive")
    return (dp_max_mw - dp0_mw) / dp_max_mw


def short_term_energies(p: SystemParameters, dp0_mw: float, dt_s: float,
                        df_m_hz: float) -> ShortTermEnergies:
    """Energy balance of a short-term dip that peaked at deviation df_m_hz.

    The nadir coincides with the instant the residual deficit is covered by
    load modulation alone: dP0 = K_R*dt' + K_L*|df_m|_pu*P_L0.  A negative
    dt' means load modulation already exceeds the deficit, so no kinetic
    energy was ever required and the episode is not of this kind.
    """
    if dp0_mw <= 0 or dt_s <= 0:
        raise InvalidParameterError("dp0 and dt must be positive")
    if p.k_r <= 0:
        raise InvalidParameterError("recovery rate must be positive")
    df_pu = abs(df_m_hz) / p.f_n
    load_mw = p.k_l * df_pu * p.p_l0
    dt_prime = (dp0_mw - load_mw) / p.k_r
    if dt_prime < 0:
        raise InfeasibleError("load modulation alone exceeds the disturbance power")
    dp0_res = p.k_r * dt_prime
    span = dt_s + dt_prime
    ds_p = (2.0 * dp0_mw - dp0_res) * span / 2.0
    ds_l = load_mw * span / 2.0
    if df_pu == 0.0:
        w_k = 0.0 if ds_p == ds_l else math.inf
    else:
        w_k = (ds_p - ds_l) / (2.0 * df_pu)
    return ShortTermEnergies(ds_p=ds_p, ds_l=ds_l, w_k=w_k,
                             dp0_res=dp0_res, dt_prime=dt_prime)


def short_term_critical_power(p: SystemParameters, dt_s: float,
                              df_max_hz: float) -> float:
    """Largest dip power (MW) that keeps the transient deviation within the limit.

    Positive root of dP^2/K_R + dP*(dt - K_L*P_L0*df_pu/K_R) - 4*H_sys*df_pu*P_G,
    the quadratic obtained by spending the admissible kinetic energy over the
    dip-plus-recovery interval.
    """
    if dt_s <= 0 or df_max_hz <= 0:
        raise InvalidParameterError("dt and df_max must be positive")
    if p.k_r <= 0:
        raise InvalidParameterError("recovery rate must be positive")
    d = derive_aggregates(p)
    df_pu = df_max_hz / p.f_n
    a = 1.0 / p.k_r
    b = dt_s - p.k_l * p.p_l0 * df_pu / p.k_r
    c = 4.0 * d.h_sys * df_pu * p.effective_p_g
    root = (-b + math.sqrt(b * b + 4.0 * a * c)) / (2.0 * a)
    return root


def step_critical_power_ss(p: SystemParameters, df_ss_hz: float) -> tuple[float, float]:
    """Steady-state critical powers (MW): regulation-bound and reserve-bound.

    The first assumes every regulating resource keeps its proportional gain at
    the limit deviation; the second caps the contribution of primary reserves
    at their ceiling, leaving only load damping beyond it.
    """
    if df_ss_hz <= 0:
        raise InvalidParameterError("df_ss must be positive")
    df_pu = df_ss_hz / p.f_n
    dp_max1 = (p.k_l * p.p_l0 + p.k_g * p.p_gn + p.k_w * p.p_new) * df_pu
    dp_max2 = p.pfr_capacity_mw + p.k_l * df_pu * p.p_l0
    return dp_max1, dp_max2


def step_critical_power_transient(sfr: SfrDerived, p: SystemParameters,
                                  df_max_hz: float) -> float:
    """Largest step (MW) whose frequency nadir stays within df_max_hz."""
    if df_max_hz <= 0:
        raise InvalidParameterError("df_max must be positive")
    t_m, df_unit = step_nadir(sfr, p, 1.0)
    if df_unit == 0.0:
        raise InvalidParameterError("degenerate response: zero nadir per MW")
    return df_max_hz / abs(df_unit)


def step_assess(p: SystemParameters, sfr: SfrDerived, dp0_mw: float,
                limits: Thresholds) -> Assessment:
    """Full step-disturbance verdict against both deviation limits."""
    if dp0_mw <= 0:
        raise InvalidParameterError("dp0 must be positive")
    dp_max1, dp_max2 = step_critical_power_ss(p, limits.df_ss_lim)
    dp_max3 = step_critical_power_transient(sfr, p, limits.df_max_lim)
    dp_max = min(dp_max1, dp_max2, dp_max3)
    eta = safety_margin(dp_max, dp0_mw)
    ss_violated = dp0_mw > min(dp_max1, dp_max2)
    tr_violated = dp0_mw > dp_max3
    if ss_violated and tr_violated:
        verdict = Verdict.BOTH_VIOLATED
    elif ss_violated:
        verdict = Verdict.STEADY_STATE_VIOLATION
    elif tr_violated:
        verdict = Verdict.TRANSIENT_VIOLATION
    else:
        verdict = Verdict.STABLE
    return Assessment(label=DisturbanceLabel.STEP, dp_max1=dp_max1,
                      dp_max2=dp_max2, dp_max3=dp_max3, dp_max=dp_max,
                      eta=eta, t_m=None, verdict=verdict)


def minute_deviation_hz(p: SystemParameters, d: DerivedAggregates,
                        k_m_mw_per_s: float, t1_s: float, df_sh_hz: float, t) -> float:
    """Signed post-exhaustion deviation (Hz) at absolute time t >= t1.

    With reserves exhausted, only frequency damping counteracts the still
    growing imbalance; the deviation departs from -df_sh with zero initial
    slope and approaches a ramp of -k/K_Lsys pu per second.
    """
    k_pu = k_m_mw_per_s / p.s_n
    kls = d.k_lsys
    tau = t - t1_s
    val = (-(k_pu * d.t_j / kls ** 2) * math.exp(-kls * tau / d.t_j)
           + (k_pu / kls) * (-tau + d.t_j / kls)
           - df_sh_hz / p.f_n)
    return val * p.f_n


def minute_overlimit_time(p: SystemParameters, d: DerivedAggregates,
                          k_m_mw_per_s: float, t1_s: float,
                          df_sh_hz: float, df_max_hz: float) -> float:
    """Absolute time (s) when the post-exhaustion deviation reaches df_max_hz.

    The magnitude grows monotonically after t1, so the crossing is bracketed
    by doubling and bisected to 1e-6 s.
    """
    if k_m_mw_per_s <= 0:
        raise InvalidParameterError("k_m must be positive")
    if not df_max_hz > df_sh_hz:
        raise InvalidParameterError("df_max must exceed df_sh")

    def magnitude(t):
        return abs(minute_deviation_hz(p, d, k_m_mw_per_s, t1_s, df_sh_hz, t))

    span = d.t_j / d.k_lsys
    lo, hi = t1_s, t1_s + span
    for _ in range(200):
        if magnitude(hi) >= df_max_hz:
            break
        lo, hi = hi, t1_s + 2.0 * (hi - t1_s)
    else:
        raise NoConvergenceError("bracketing the minute-level crossing failed")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if magnitude(mid) >= df_max_hz:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-6:
            break
    else:
        raise NoConvergenceError("bisection for the minute-level crossing stalled")
    return 0.5 * (lo + hi)


def assess(estimate: DisturbanceEstimate, p: SystemParameters,
           th: Thresholds) -> Assessment:
    """Dispatch the classified disturbance to its label-specific criterion."""
    d = derive_aggregates(p)
    if estimate.label is DisturbanceLabel.STEP:
        sfr = derive_sfr(p, d)
        return step_assess(p, sfr, abs(estimate.dp0), th)
    if estimate.label is DisturbanceLabel.SHORT_TERM:
        dp_max = short_term_critical_power(p, estimate.fault_duration, th.df_max_lim)
        eta = safety_margin(dp_max, abs(estimate.dp0))
        verdict = Verdict.STABLE if eta >= 0 else Verdict.TRANSIENT_VIOLATION
        return Assessment(label=estimate.label, dp_max1=None, dp_max2=None,
                          dp_max3=None, dp_max=dp_max, eta=eta, t_m=None,
                          verdict=verdict)
    if estimate.label is DisturbanceLabel.SECOND_SLOPE:
        sfr = derive_sfr(p, d)
        t_m = ramp_overlimit_time(sfr, p, abs(estimate.k_s), th.df_max_lim)
        return Assessment(label=estimate.label, dp_max1=None, dp_max2=None,
                          dp_max3=None, dp_max=None, eta=None, t_m=t_m,
                          verdict=Verdict.OVER_LIMIT_AT)
    if estimate.label is DisturbanceLabel.MINUTE_SLOPE:
        t_m = minute_overlimit_time(p, d, estimate.k_m, estimate.t1,
                                    th.df_sh, th.df_max_lim)
        return Assessment(label=estimate.label, dp_max1=None, dp_max2=None,
                          dp_max3=None, dp_max=None, eta=None, t_m=t_m,
                          verdict=Verdict.OVER_LIMIT_AT)
    raise InvalidParameterError(f"unknown label: {estimate.label!r}")
