"""Closed-form frequency-response analytics for the reduced second-order model.

The aggregated swing + reheat-governor loop reduces to a second-order system
whose two mode time constants may be a real pair (overdamped) or a complex
conjugate pair (oscillatory).  One complex-arithmetic code path serves both;
real parts are extracted only after the imaginary residue is verified to be
negligible.

Sign convention: a positive disturbance power (generation deficit) produces a
negative frequency deviation.  All returned deviations are signed Hz; callers
compare magnitudes against limits.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError, NoConvergenceError
from .model import DerivedAggregates, SystemParameters

# Largest tolerated |Im|/|value| after conjugate-pair cancellation.
_IM_TOL = 1e-9


@dataclass(frozen=True)
class SfrDerived:
    """Second-order reduction of the aggregated frequency-response loop."""

    omega_n: float        # natural frequency (rad/s)
    zeta: float           # damping ratio
    omega_r: float | None  # damped frequency (rad/s); None when zeta >= 1
    alpha: float | None   # overshoot coefficient; None when zeta >= 1
    t1: complex           # slow mode time constant (s); complex pair when zeta < 1
    t2: complex           # fast mode time constant (s)
    kc1: complex          # ramp-response coefficient tied to t1
    kc2: complex          # ramp-response coefficient tied to t2
    t_r: float            # reheat time constant carried for evaluation (s)
    gain_pu: float        # static gain R/(K_Lsys*R + 1), pu deviation per pu step


def derive_sfr(p: SystemParameters, d: DerivedAggregates) -> SfrDerived:
    """Reduce the swing + reheat-governor loop to its second-order constants.

    omega_n^2 = (K_Lsys*R + 1)/(2*H_sys*R*T_R) and
    zeta = omega_n*(2*H_sys*R + (K_Lsys*R + F_H)*T_R)/(2*(K_Lsys*R + 1)),
    with unity mechanical gain.  zeta = 1 exactly is perturbed to 1 + 1e-9 so
    the two-pole factorization never degenerates.
    """
    if d.h_sys <= 0:
        raise InvalidParameterError("h_sys must be positive for the reduced model")
    klr1 = d.k_lsys * p.r + 1.0
    omega_n = math.sqrt(klr1 / (2.0 * d.h_sys * p.r * p.t_r))
    zeta = omega_n * (2.0 * d.h_sys * p.r + (d.k_lsys * p.r + p.f_h) * p.t_r) / (2.0 * klr1)
    zeta_eff = 1.0 + 1e-9 if abs(zeta - 1.0) < 1e-12 else zeta

    disc = cmath.sqrt(complex(zeta_eff * zeta_eff - 1.0, 0.0))
    t1 = (zeta_eff + disc) / omega_n
    t2 = (zeta_eff - disc) / omega_n
    kc1 = (t1 * t1 - p.t_r * t1) / (t1 - t2)
    kc2 = (t2 * t2 - p.t_r * t2) / (t2 - t1)

    if zeta_eff < 1.0:
        omega_r = omega_n * math.sqrt(1.0 - zeta_eff * zeta_eff)
        num = 1.0 - 2.0 * p.t_r * zeta_eff * omega_n + p.t_r * p.t_r * omega_n * omega_n
        alpha = math.sqrt(num / (1.0 - zeta_eff * zeta_eff))
    else:
        omega_r = None
        alpha = None

    return SfrDerived(omega_n=omega_n, zeta=zeta, omega_r=omega_r, alpha=alpha,
                      t1=t1, t2=t2, kc1=kc1, kc2=kc2, t_r=p.t_r,
                      gain_pu=p.r / klr1)


def _real_part(values, label: str):
    """Strip verified-negligible imaginary residue from a complex evaluation."""
    values = np.asarray(values)
    scale = np.maximum(np.abs(values), 1e-30)
    if np.any(np.abs(values.imag) / scale > _IM_TOL):
        raise ArithmeticError(f"imaginary residue above tolerance in {label}")
    return values.real


def step_shape(sfr: SfrDerived, t) -> np.ndarray:
    """Normalized step response g(t): unit steady state, g(0) = 0.

    g(t) = 1 + B*exp(s1*t) + C*exp(s2*t) with s_i = -1/T_i and residues from
    the partial-fraction expansion of w_n^2*(1 + T_R*s)/(s*(s - s1)*(s - s2)).
    """
    t = np.asarray(t, dtype=float)
    s1 = -1.0 / sfr.t1
    s2 = -1.0 / sfr.t2
    wn2 = sfr.omega_n ** 2
    b = wn2 * (1.0 + sfr.t_r * s1) / (s1 * (s1 - s2))
    c = wn2 * (1.0 + sfr.t_r * s2) / (s2 * (s2 - s1))
    g = 1.0 + b * np.exp(s1 * t) + c * np.exp(s2 * t)
    return _real_part(g, "step response")


def _stationary_time(sfr: SfrDerived) -> float:
    """First positive stationary point of the step response (s)."""
    if sfr.zeta < 1.0:
        # atan2 lands in (0, pi) for T_R > 0, which is already the first
        # positive root of the derivative.
        return math.atan2(sfr.omega_r * sfr.t_r,
                          sfr.zeta * sfr.omega_n * sfr.t_r - 1.0) / sfr.omega_r
    s1 = (-1.0 / sfr.t1).real
    s2 = (-1.0 / sfr.t2).real
    wn2 = sfr.omega_n ** 2
    b = wn2 * (1.0 + sfr.t_r * s1) / (s1 * (s1 - s2))
    c = wn2 * (1.0 + sfr.t_r * s2) / (s2 * (s2 - s1))
    ratio = -(c * s2) / (b * s1)
    if ratio <= 0.0:
        raise ArithmeticError("no stationary point on the real-exponential form")
    return math.log(ratio) / (s1 - s2)


def step_response(sfr: SfrDerived, p: SystemParameters, dp0_mw: float, t) -> np.ndarray:
    """Signed frequency deviation (Hz) after a sustained power-deficit step."""
    shape = step_shape(sfr, t)
    return -p.f_n * sfr.gain_pu * (dp0_mw / p.s_n) * shape


def step_nadir(sfr: SfrDerived, p: SystemParameters, dp0_mw: float) -> tuple[float, float]:
    """Time of the frequency extremum and the signed peak deviation (s, Hz).

    The extremum time depends only on the mode constants; the deviation is
    linear in dp0_mw, so dp0_mw = 0 gives a zero peak at the same instant.
    """
    t_m = _stationary_time(sfr)
    df_m = float(step_response(sfr, p, dp0_mw, t_m))
    return t_m, df_m


def ramp_shape(sfr: SfrDerived, t) -> np.ndarray:
    """Normalized ramp response: t + T_R - T1 - T2 + kc1*e^(-t/T1) + kc2*e^(-t/T2)."""
    t = np.asarray(t, dtype=float)
    f = (t + sfr.t_r - sfr.t1 - sfr.t2
         + sfr.kc1 * np.exp(-t / sfr.t1) + sfr.kc2 * np.exp(-t / sfr.t2))
    return _real_part(f, "ramp response")


def ramp_response(sfr: SfrDerived, p: SystemParameters, k_s_mw_per_s: float, t) -> np.ndarray:
    """Signed frequency deviation (Hz) at time t under a sustained deficit ramp."""
    shape = ramp_shape(sfr, t)
    return -p.f_n * sfr.gain_pu * (k_s_mw_per_s / p.s_n) * shape


def ramp_overlimit_time(sfr: SfrDerived, p: SystemParameters,
                        k_s_mw_per_s: float, df_max_hz: float) -> float:
    """First time (s from ramp inception) the deviation magnitude hits df_max_hz.

    The target in normalized-shape units is bracketed by stepping T_R/4 along
    the monotone tail, then bisected to 1e-9 s.
    """
    if k_s_mw_per_s <= 0 or df_max_hz <= 0:
        raise InvalidParameterError("ramp rate and limit must be positive")
    # Normalized target value of the ramp shape at the crossing.
    target = df_max_hz * p.s_n / (p.f_n * sfr.gain_pu * k_s_mw_per_s)

    step = sfr.t_r / 4.0
    lo, hi = 0.0, step
    for _ in range(100000):
        if ramp_shape(sfr, hi) >= target:
            break
        lo, hi = hi, hi + step
    else:
        raise NoConvergenceError("bracketing the ramp over-limit time failed")

    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if ramp_shape(sfr, mid) >= target:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-9:
            break
    else:
        raise NoConvergenceError("bisection for the ramp over-limit time stalled")
    return 0.5 * (lo + hi)
