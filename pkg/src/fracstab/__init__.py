"""fracstab: Caputo fractional-order delay systems.

Simulation of nonlinear fractional systems with state-dependent delays,
numerical evaluation of singular-kernel Lyapunov-Krasovskii functionals,
LMI-based Mittag-Leffler stability certificates, and adaptive control with
fractional parameter update laws, benchmarked on a three-neuron fractional
Hopfield network.
"""

__version__ = "0.1.0"

from . import control, errors, fde, hopfield, lkf, sdp, specfun, stability

__all__ = [
    "__version__",
    "control",
    "errors",
    "fde",
    "hopfield",
    "lkf",
    "sdp",
    "specfun",
    "stability",
]
