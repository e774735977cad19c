"""Aggregated single-machine system model, derived constants, and thresholds.

All internal computations run in per-unit (power on the system base s_n,
frequency deviation on the nominal frequency f_n).  Public functions accept
and return engineering units: Hz, MW, seconds.  Frequency deviations are
stored signed, with under-frequency negative; limits are compared on
magnitudes.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidParameterError


def to_per_unit(value: float, base: float) -> float:
    """Scale an absolute quantity onto the given base."""
    return value / base


def from_per_unit(value: float, base: float) -> float:
    """Recover the absolute quantity from its per-unit value."""
    return value * base


@dataclass(frozen=True)
class SystemParameters:
    """Operating point of the aggregated grid equivalent.

    Powers in MW, times in s, frequencies in Hz.  The regulation gains are
    per-unit coefficients; k_l applies to the load base p_l0 in the quasi
    steady-state power-balance formulas and to the system base inside the
    swing model, following the usual aggregated-model convention.
    """

    f_n: float            # nominal frequency (Hz)
    s_n: float            # system base power (MW)
    h: float              # synchronous inertia constant (s, on s_n)
    k_n: float            # share of converter-interfaced units, 0..1
    k_v: float            # virtual-inertia coefficient of those units (s)
    k_l: float            # load frequency-damping coefficient (pu)
    k_w: float            # converter primary-regulation gain (pu)
    r: float              # equivalent governor droop (pu); gain is 1/r
    f_h: float            # high-pressure stage fraction of turbine power
    t_r: float            # reheat time constant (s)
    p_gn: float           # online conventional unit capacity (MW)
    p_new: float          # online converter-interfaced capacity (MW)
    p_l0: float           # pre-disturbance load level (MW)
    m: float              # reserve fraction held by conventional units
    n: float              # reserve fraction held by converter units
    k_r: float            # post-fault output recovery rate (MW/s)
    p_g: float | None = None      # online generation for the pulse-energy balance; None -> p_gn + p_new
    renewable_lag_s: float = 0.1  # first-order lag of the converter damping branch (s), 0 = instantaneous

    def __post_init__(self):
        if self.f_n <= 0 or self.s_n <= 0:
            raise InvalidParameterError("f_n and s_n must be positive")
        if self.h < 0 or self.k_v < 0:
            raise InvalidParameterError("inertia constants must be non-negative")
        if not 0.0 <= self.k_n <= 1.0:
            raise InvalidParameterError("k_n must lie in [0, 1]")
        if self.r <= 0:
            raise InvalidParameterError("droop r must be positive")
        if not 0.0 <= self.f_h <= 1.0:
            raise InvalidParameterError("f_h must lie in [0, 1]")
        if self.t_r <= 0:
            raise InvalidParameterError("reheat time constant t_r must be positive")
        if not 0.0 <= self.m <= 1.0 or not 0.0 <= self.n <= 1.0:
            raise InvalidParameterError("reserve fractions m, n must lie in [0, 1]")
        if min(self.k_l, self.k_w, self.p_gn, self.p_new, self.p_l0) < 0:
            raise InvalidParameterError("gains and capacities must be non-negative")
        if self.k_r < 0:
            raise InvalidParameterError("recovery rate k_r must be non-negative")
        if self.renewable_lag_s < 0:
            raise InvalidParameterError("renewable_lag_s must be non-negative")

    @property
    def k_g(self) -> float:
        """Governor gain, the reciprocal of the droop."""
        return 1.0 / self.r

    @property
    def pfr_capacity_mw(self) -> float:
        """Combined primary-reserve ceiling m*p_gn + n*p_new (MW)."""
        return self.m * self.p_gn + self.n * self.p_new

    @property
    def effective_p_g(self) -> float:
        return self.p_g if self.p_g is not None else self.p_gn + self.p_new


@dataclass(frozen=True)
class DerivedAggregates:
    """Constants of the mixed synchronous / converter fleet."""

    h_sys: float   # effective inertia constant incl. virtual inertia (s)
    k_lsys: float  # effective damping: load plus converter regulation (pu)
    t_j: float     # acceleration time constant, 2*h_sys (s)


def derive_aggregates(p: SystemParameters) -> DerivedAggregates:
    """Fold the converter share into effective inertia and damping."""
    h_sys = p.h + p.k_n * p.k_v / 2.0
    k_lsys = p.k_l + p.k_n * p.k_w
    return DerivedAggregates(h_sys=h_sys, k_lsys=k_lsys, t_j=2.0 * h_sys)


def compute_power_threshold(k1: float, t_dist: float) -> float:
    """Power threshold (MW) separating abrupt from slow disturbances.

    k1 is the slowest power gradient (MW/s) that still matters within the
    distribution window t_dist (s); anything below k1*t_dist after t_dist
    is handled by the slow-disturbance path.
    """
    if k1 < 0 or t_dist <= 0:
        raise InvalidParameterError("k1 must be >= 0 and t_dist > 0")
    return k1 * t_dist


def compute_frequency_threshold(p: SystemParameters, f_d: float) -> float:
    """Frequency-deviation threshold (Hz) at which primary reserve runs out.

    The deviation that drives the combined governor + converter regulation
    (gains k_g + k_w on the system base) to its reserve ceiling, plus the
    governor dead band f_d (Hz).
    """
    gain = (p.k_g + p.k_w) * p.s_n
    if gain <= 0:
        raise InvalidParameterError("combined regulation gain must be positive")
    if f_d < 0:
        raise InvalidParameterError("dead band f_d must be non-negative")
    return p.pfr_capacity_mw / gain * p.f_n + f_d


@dataclass(frozen=True)
class Thresholds:
    """Classification thresholds and the stability limits they guard.

    Explicitly supplied dp_sh / df_sh win over auto-derived values, since
    operators often publish the thresholds directly.
    """

    k1: float          # slow/fast boundary power gradient (MW/s)
    t_dist: float      # disturbance distribution window (s)
    dp_sh: float       # power threshold (MW)
    df_sh: float       # frequency-deviation threshold (Hz, magnitude)
    f_d: float         # governor dead band (Hz)
    df_ss_lim: float   # steady-state deviation limit (Hz, magnitude)
    df_max_lim: float  # transient deviation limit (Hz, magnitude)

    def __post_init__(self):
        if self.dp_sh < 0 or self.df_sh <= 0:
            raise InvalidParameterError("thresholds must be positive")
        if not self.df_sh < self.df_max_lim:
            raise InvalidParameterError("df_sh must lie below df_max_lim")
        if not 0 < self.df_ss_lim < self.df_max_lim:
            raise InvalidParameterError("df_ss_lim must lie in (0, df_max_lim)")

    @classmethod
    def derive(cls, p: SystemParameters, k1: float, t_dist: float, f_d: float,
               df_ss_lim: float, df_max_lim: float,
               dp_sh: float | None = None, df_sh: float | None = None) -> "Thresholds":
        """Build thresholds, computing any not stated explicitly."""
        if dp_sh is None:
            dp_sh = compute_power_threshold(k1, t_dist)
        if df_sh is None:
            df_sh = compute_frequency_threshold(p, f_d)
        return cls(k1=k1, t_dist=t_dist, dp_sh=dp_sh, df_sh=df_sh, f_d=f_d,
                   df_ss_lim=df_ss_lim, df_max_lim=df_max_lim)
