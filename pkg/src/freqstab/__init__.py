"""Frequency-stability screening for active-power disturbances.

Classify an unanticipated disturbance from generator electrical-power
responses, quantify its intensity, and judge containment against steady-state
and transient frequency-deviation limits, with a fixed-step time-domain
simulator as the reference for every closed form.
"""

from .assessor import (Assessment, ShortTermEnergies, Verdict, assess,
                       minute_deviation_hz, minute_overlimit_time,
                       safety_margin, short_term_critical_power,
                       short_term_energies, step_assess,
                       step_critical_power_ss, step_critical_power_transient)
from .classifier import (DisturbanceEstimate, DisturbanceLabel, classify,
                         detect_onset)
from .errors import (AmbiguousClassificationError, DegenerateWeightsError,
                     FreqstabError, InfeasibleError, InsufficientSamplesError,
                     InvalidParameterError, NoConvergenceError, NoOnsetError,
                     OutOfRangeError, ParseError, SchemaError,
                     UnstableIntegrationError)
from .estimator import (GeneratorCoupling, NetworkSnapshot, ResponseSet,
                        anchored_slope, disturbance_power_from_network,
                        disturbance_power_from_pe, minute_slope_at_threshold,
                        slope_estimate)
from .model import (DerivedAggregates, SystemParameters, Thresholds,
                    compute_frequency_threshold, compute_power_threshold,
                    derive_aggregates, from_per_unit, to_per_unit)
from .scenario_io import (ScenarioBundle, bundle_to_dict, disturbance_to_dict,
                          list_bundled, load_bundled, load_scenario,
                          parse_bundle)
from .sfr import (SfrDerived, derive_sfr, ramp_overlimit_time, ramp_response,
                  ramp_shape, step_nadir, step_response, step_shape)
from .simulator import (Disturbance, RampDisturbance, Scenario,
                        ShortTermDisturbance, SimTrace, StepDisturbance,
                        find_overlimit_time, simulate,
                        synthesize_generator_responses)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
