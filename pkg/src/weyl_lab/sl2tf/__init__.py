"""Selberg trace formula for the principal congruence subgroups Gamma(N)."""

from .groups import CongruenceGroup, LevelError, group_data, trace_congruence_bound
from .lengths import LengthSpectrum, length_spectrum
from .scattering import ScatteringData, load_constants, scattering_phase
from .trace import (SupportError, TraceFormulaEvaluation, geometric_side, geometric_side_grid,
                    selberg_autocorrelation, smoothed_count)

__all__ = [
    "CongruenceGroup", "LevelError", "group_data", "trace_congruence_bound",
    "LengthSpectrum", "length_spectrum", "ScatteringData", "load_constants",
    "scattering_phase", "SupportError", "TraceFormulaEvaluation", "geometric_side",
    "geometric_side_grid", "selberg_autocorrelation", "smoothed_count",
]
