"""Coupled electrode/electrolyte potential solver.

Configuration keys match the command-line tool (``porelec --print-defaults``);
values may be given as numbers, strings or lists.
"""

from ._core import (
    ConfigError,
    ConvergenceError,
    IoError,
    ParameterError,
    bruggeman,
    bv_source,
    convergence,
    default_config,
    derive_coefficients,
    generate_porosity,
    objective_scan,
    overpotential,
    reaction_current,
    run,
    shoot,
    solve,
)

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "IoError",
    "ParameterError",
    "bruggeman",
    "bv_source",
    "convergence",
    "default_config",
    "derive_coefficients",
    "generate_porosity",
    "objective_scan",
    "overpotential",
    "reaction_current",
    "run",
    "shoot",
    "solve",
]
