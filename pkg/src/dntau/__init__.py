"""dntau: exact tau-function engine for the (h,2)-reduced 2-component BKP
hierarchy attached to the D_N singularity."""

from .exact import BigComplex, GaussianRational, double_factorial
from .operators import Params, WavePair, build_basis, gaussian_oracle, solve_wave
from .series import Ring, Series
from .tau import MiwaConfig, TauSeries, miwa_invert, miwa_tau, tau_series

__all__ = [
    "BigComplex", "GaussianRational", "double_factorial",
    "Params", "WavePair", "build_basis", "gaussian_oracle", "solve_wave",
    "Ring", "Series",
    "MiwaConfig", "TauSeries", "miwa_invert", "miwa_tau", "tau_series",
]

__version__ = "0.1.0"
