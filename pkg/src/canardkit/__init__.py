"""Simulation and analysis of fast-slow systems with transcritical passages.

Modules
-------
numerics
    Fixed-step RK4 with section crossings, root finding, Lambert W0,
    adaptive quadrature.
models
    Vector fields, closed-form orbits, parameter records and systems.
slowfast
    Critical sets, equilibrium types, bifurcations, delays, transition maps.
canard_formulas
    Closed-form passage times and exit values near a transcritical saddle.
cli
    Command-line front end (``canardkit`` / ``python -m canardkit``).
"""

__version__ = "0.1.0"

from .errors import (AssumptionError, BlowUpError, BracketError, CanardError,
                     ConfigError, DivergenceError, DomainError,
                     EntryNotInSectionError, IntegrationError, NoExitError,
                     NotAnEquilibriumError)
from .numerics import (CrossingEvent, IntegratorConfig, Section, Trajectory,
                       adaptive_simpson, find_root, integrate, integrate_stiff,
                       lambert_w0, rk4_step)
from .models import System, make_system

__all__ = [
    "AssumptionError", "BlowUpError", "BracketError", "CanardError", "ConfigError",
    "DivergenceError", "DomainError", "EntryNotInSectionError", "IntegrationError",
    "NoExitError", "NotAnEquilibriumError", "CrossingEvent", "IntegratorConfig",
    "Section", "Trajectory", "adaptive_simpson", "find_root", "integrate",
    "integrate_stiff", "lambert_w0", "rk4_step", "System", "make_system",
]
