"""Pulse-coupled-oscillator heading coordination under turn-rate limits.

A deterministic continuous-time, event-driven simulator and analysis
library for networks of mobile robots that coordinate their headings
by exchanging pulses: each robot carries an internal phase that climbs
to a threshold, fires, and shifts in response to neighbors' pulses,
while the physical heading can only turn at a bounded rate.
"""

from .engine import (OscillatorState, Simulation, Trace, init, run,
                     run_instantaneous_assumption)
from .errors import ConfigError, EngineInvariantError, TheoremViolationError
from .metrics import (ArcReport, DesyncReport, PulseClass, classify_pulse,
                      containing_arc, desync_measure, firing_order_history,
                      heading_drift_rate, predicted_measure_change,
                      run_instant_updates)
from .oracle import OracleConfig, oracle_run
from .prc import (DesyncPrf, GeneralPrf, SyncPrc, check_update_map_monotone,
                  desync_response, effective_coupling_backward,
                  effective_coupling_forward, general_response,
                  rate_limited_prf, response, sync_response)
from .scenario import (DelayModel, InitSpec, SimConfig, Topology, Violation,
                       all_to_all, bidirectional_ring, is_strongly_connected,
                       load_config, sample_delay, validate)
from .torus import (ANGLE_EPS, TWO_PI, angles_equal, circular_distance,
                    cw_gap, heading_from_phase, wrap, wrap_signed)

__version__ = "0.1.0"

__all__ = [
    "ANGLE_EPS", "TWO_PI", "ArcReport", "ConfigError", "DelayModel",
    "DesyncPrf", "DesyncReport", "EngineInvariantError", "GeneralPrf",
    "InitSpec", "OracleConfig", "OscillatorState", "PulseClass",
    "SimConfig", "Simulation", "SyncPrc", "TheoremViolationError",
    "Topology", "Trace", "Violation", "all_to_all", "angles_equal",
    "bidirectional_ring", "check_update_map_monotone", "circular_distance",
    "classify_pulse", "containing_arc", "cw_gap", "desync_measure",
    "desync_response", "effective_coupling_backward",
    "effective_coupling_forward", "firing_order_history", "general_response",
    "heading_drift_rate", "heading_from_phase", "init",
    "is_strongly_connected", "load_config", "oracle_run",
    "predicted_measure_change", "rate_limited_prf", "response", "run",
    "run_instant_updates", "run_instantaneous_assumption", "sample_delay",
    "sync_response", "validate", "wrap", "wrap_signed",
]
