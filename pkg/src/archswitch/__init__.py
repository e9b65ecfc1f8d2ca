"""Delayed switching of shallow bistable arches.

Modal arch model, fold location and normal-form reduction, closed-form
switching-time laws, time integration with switching detection, and a
command-line harness for comparisons and parameter sweeps.
"""

from ._backend import BACKEND
from .analytic import Regime, SwitchingPrediction, predict
from .dynamics import (
    SimulationConfig,
    SwitchingEvent,
    TimeSeries,
    detect_switching,
    integrate_full,
    integrate_normal_form,
    integrate_overdamped,
    simulate_switching,
)
from .errors import (
    ArchSwitchError,
    DegenerateReduction,
    IntegrationError,
    MaxTimeExceeded,
    NewtonDivergence,
    NoSwitching,
    NotBistable,
    StepSizeUnderflow,
    UnsupportedMode,
    ValidationError,
)
from .model import ArchGeometry, LoadProgram, NondimArch, ScaleSet, nondimensionalize
from .statics import CriticalPoint, critical_point, remote_point, trace_equilibrium_path

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "Regime",
    "SwitchingPrediction",
    "predict",
    "SimulationConfig",
    "SwitchingEvent",
    "TimeSeries",
    "detect_switching",
    "integrate_full",
    "integrate_normal_form",
    "integrate_overdamped",
    "simulate_switching",
    "ArchSwitchError",
    "DegenerateReduction",
    "IntegrationError",
    "MaxTimeExceeded",
    "NewtonDivergence",
    "NoSwitching",
    "NotBistable",
    "StepSizeUnderflow",
    "UnsupportedMode",
    "ValidationError",
    "ArchGeometry",
    "LoadProgram",
    "NondimArch",
    "ScaleSet",
    "nondimensionalize",
    "CriticalPoint",
    "critical_point",
    "remote_point",
    "trace_equilibrium_path",
]
