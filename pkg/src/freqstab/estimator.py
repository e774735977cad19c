"""Disturbance power and slope estimation from measured generator responses.

The total imbalance is read as the sum of per-generator electromagnetic-power
deviations; with synchronized machines it can equally be reconstructed from
voltage magnitudes, susceptances, and power-angle increments at the
disturbance point.  Slopes are fitted anchored at the detected onset, so the
fit is exact on affine segments and returns zero on constants.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateWeightsError,
    InsufficientSamplesError,
    InvalidParameterError,
    OutOfRangeError,
)
from .model import SystemParameters


@dataclass
class ResponseSet:
    """Time-aligned per-generator measurement bundle.

    per_generator_dpe maps generator id to its electromagnetic-power deviation
    series (MW); per_generator_frequency optionally carries frequency
    deviations (Hz) on the same sample grid.
    """

    sample_times: np.ndarray
    per_generator_dpe: dict[str, np.ndarray]
    per_generator_frequency: dict[str, np.ndarray] | None = None

    def __post_init__(self):
        self.sample_times = np.asarray(self.sample_times, dtype=float)
        if self.sample_times.ndim != 1:
            raise InvalidParameterError("sample_times must be one-dimensional")
        if self.sample_times.size > 1 and not np.all(np.diff(self.sample_times) > 0):
            raise InvalidParameterError("sample_times must be strictly increasing")
        n = self.sample_times.size
        self.per_generator_dpe = {
            k: np.asarray(v, dtype=float) for k, v in self.per_generator_dpe.items()
        }
        for name, series in self.per_generator_dpe.items():
            if series.shape != (n,):
                raise InvalidParameterError(f"series length mismatch for {name!r}")
        if self.per_generator_frequency is not None:
            self.per_generator_frequency = {
                k: np.asarray(v, dtype=float)
                for k, v in self.per_generator_frequency.items()
            }
            for name, series in self.per_generator_frequency.items():
                if series.shape != (n,):
                    raise InvalidParameterError(f"frequency length mismatch for {name!r}")

    def total_power(self) -> np.ndarray:
        """Summed deviation series (MW); zeros when no generators are present."""
        if not self.per_generator_dpe:
            return np.zeros_like(self.sample_times)
        return np.sum(list(self.per_generator_dpe.values()), axis=0)

    def system_frequency(self) -> np.ndarray | None:
        """Equal-weight mean of the per-generator frequency series (Hz)."""
        if not self.per_generator_frequency:
            return None
        return np.mean(list(self.per_generator_frequency.values()), axis=0)


@dataclass(frozen=True)
class GeneratorCoupling:
    """Electrical coupling of one generator to the disturbance point."""

    name: str
    e_i: float         # internal voltage (pu)
    b_ip: float        # susceptance to the disturbance point (pu)
    delta_ip: float    # power-angle difference to the disturbance point (rad)
    d_delta_ip: float  # increment of that angle difference (rad)

    def __post_init__(self):
        if self.e_i <= 0:
            raise InvalidParameterError("internal voltage must be positive")


@dataclass(frozen=True)
class NetworkSnapshot:
    """Disturbance-point voltage plus per-generator couplings, on base s_n (MW)."""

    u_p: float
    generators: tuple[GeneratorCoupling, ...]
    s_n: float

    def __post_init__(self):
        if self.u_p <= 0 or self.s_n <= 0:
            raise InvalidParameterError("u_p and s_n must be positive")

    def synchronizing_weights(self) -> dict[str, float]:
        """Per-generator synchronizing coefficients U_p*E_i*B_ip*cos(delta_ip)."""
        return {
            g.name: self.u_p * g.e_i * g.b_ip * math.cos(g.delta_ip)
            for g in self.generators
        }


def disturbance_power_from_pe(r: ResponseSet, t: float) -> float:
    """Total disturbance power (MW) at time t, linearly interpolated."""
    if not r.per_generator_dpe:
        warnings.warn("empty response set; disturbance power defaults to 0 MW",
                      RuntimeWarning, stacklevel=2)
        return 0.0
    times = r.sample_times
    if t < times[0] or t > times[-1]:
        raise OutOfRangeError(f"t = {t} s outside sampled range "
                              f"[{times[0]}, {times[-1]}] s")
    return float(np.interp(t, times, r.total_power()))


def disturbance_power_from_network(s: NetworkSnapshot) -> float:
    """Disturbance power (MW) reconstructed from angle increments.

    Sums U_p*E_i*B_ip*cos(delta_ip)*d_delta_ip over generators (the
    synchronized-machine simplification with zero inter-machine angle spread)
    and converts from pu to MW on the snapshot base.
    """
    weights = s.synchronizing_weights()
    total_pu = sum(weights[g.name] * g.d_delta_ip for g in s.generators)
    return total_pu * s.s_n


def anchored_slope(times: np.ndarray, values: np.ndarray,
                   t_a: float, t_b: float) -> float:
    """Least-squares slope of values over [t_a, t_b], anchored at (t_a, y(t_a)).

    Forcing the line through the interpolated level at t_a makes the estimate
    exact on affine data and zero on constants; with the disturbance onset as
    anchor this realizes a fit of the form dP = k*(t - onset) + dP(onset).
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if t_b <= t_a:
        raise InvalidParameterError("window end must exceed window start")
    if t_a < times[0] or t_a > times[-1]:
        raise OutOfRangeError("window start outside the sampled range")
    y0 = float(np.interp(t_a, times, values))
    mask = (times >= t_a) & (times <= t_b)
    dt = times[mask] - t_a
    dy = values[mask] - y0
    # Drop the anchor sample itself: zero offset contributes nothing.
    keep = dt > 0
    dt, dy = dt[keep], dy[keep]
    denom = float(np.dot(dt, dt))
    if denom == 0.0:
        raise DegenerateWeightsError("no spread in sample times within the window")
    return float(np.dot(dt, dy) / denom)


def slope_estimate(r: ResponseSet, window: tuple[float, float]) -> float:
    """Disturbance-power slope (MW/s) over the window, anchored at its start."""
    t_a, t_b = window
    times = r.sample_times
    n_in = int(np.count_nonzero((times >= t_a) & (times <= t_b)))
    if n_in < 3:
        raise InsufficientSamplesError(
            f"slope fit needs >= 3 samples in the window, found {n_in}")
    return anchored_slope(times, r.total_power(), t_a, t_b)


def minute_slope_at_threshold(p: SystemParameters, df_sh_hz: float, t1_s: float) -> float:
    """Slope (MW/s) from the power balance when the deviation threshold is hit.

    The growth over t1 must equal the consumed compensation budget: load
    regulation K_L*(df_sh/f_N)*P_L0 plus the primary-reserve ceiling.
    """
    if t1_s <= 0:
        raise InvalidParameterError("t1 must be positive")
    if df_sh_hz < 0:
        raise InvalidParameterError("df_sh must be non-negative")
    budget = p.k_l * (df_sh_hz / p.f_n) * p.p_l0 + p.pfr_capacity_mw
    return budget / t1_s
