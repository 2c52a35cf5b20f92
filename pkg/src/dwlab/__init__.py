"""Desk-scale laboratory for non-self-adjoint wave spectra.

Subpackages: `dwcore` (damped wave pencils on model manifolds), `thermo`
(pressure, rate functions, large deviations on finite subshifts), `flowavg`
(geodesic-flow window averages and correctors), `arith` (arithmetic length
spectra and trace sums), `counting` (argument-principle and Jensen zero
counting), and a configuration-driven CLI (`dwlab.cli`).
"""

from . import arith, counting, dwcore, flowavg, io, kernels, thermo

__version__ = "0.1.0"

__all__ = ["arith", "counting", "dwcore", "flowavg", "io", "kernels",
           "thermo", "__version__"]
