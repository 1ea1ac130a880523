"""Barut-Girardello coherent states of the nonlinear oscillator with
position-dependent mass ``m(x) = 1/(1 + lambda x^2)``.

Modules
-------
specfun
    Gamma, Pochhammer, 0F1/0F3 series and the Meijer G^{4,0}_{0,4} evaluator.
model
    Classical orbits and the grid ground state.
algebra
    Truncated Fock realization of the ladder and su(1,1) operators.
bgcs
    Coherent states, overlaps and resolution-of-unity moments.
stats
    Occupation statistics, Mandel Q and g2.
cli
    Command-line driver.
"""

from .algebra import FockRealization, build_realization, check_algebra
from .bgcs import CoherentState, WeightDensity, make_state, moment_check, overlap
from .model import OscillatorParams, integrate_orbit
from .specfun import PrecisionConfig, hyper0f3, meijer_g_4040
from .stats import StatSummary, summarize

__version__ = "0.1.0"

__all__ = [
    "CoherentState",
    "FockRealization",
    "OscillatorParams",
    "PrecisionConfig",
    "StatSummary",
    "WeightDensity",
    "build_realization",
    "check_algebra",
    "hyper0f3",
    "integrate_orbit",
    "make_state",
    "meijer_g_4040",
    "moment_check",
    "overlap",
    "summarize",
]
