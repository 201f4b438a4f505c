"""Resonances of a Friedrichs model under a constant (DC Stark) field."""
from .profiles import Profile, gauss_poly, make_gaussian, make_model2, make_psi0_default, make_zero_profile
from .resolvent import (EvalBudget, F_model1, F_model2, model2_r0_formula, psi_f, resolvent_continued,
                        resolvent_direct, resolvent_f0_continued)
from .rootfind import ResonanceRecord, newton, scan_window, winding_count
from .trajectories import TrajectoryPoint, instability_report, mu_sweep, trace

__version__ = "0.1.0"

__all__ = [
    "EvalBudget", "F_model1", "F_model2", "Profile", "ResonanceRecord", "TrajectoryPoint", "gauss_poly",
    "instability_report", "make_gaussian", "make_model2", "make_psi0_default", "make_zero_profile",
    "model2_r0_formula", "mu_sweep", "newton", "psi_f", "resolvent_continued", "resolvent_direct",
    "resolvent_f0_continued", "scan_window", "trace", "winding_count",
]
