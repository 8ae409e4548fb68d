"""Gaussian simulation of broadband EPR-beam generation.

Submodules:

* :mod:`cvepr.gaussian` -- covariance-matrix states and optical elements
* :mod:`cvepr.criterion` -- Delta-EPR inseparability sum, loss inference
* :mod:`cvepr.detection` -- homodyne detector and spectrum-analyzer model
* :mod:`cvepr.phasematch` -- QPM bandwidth of the PPLN waveguide
* :mod:`cvepr.montecarlo` -- Monte-Carlo oracle
* :mod:`cvepr.config`, :mod:`cvepr.runs`, :mod:`cvepr.cli` -- scenario runner
"""

from .criterion import EprResult, delta_epr, epr_spectrum, infer_direct_squeezing
from .gaussian import (
    BeamSplitterSpec,
    GaussianState,
    LossChannel,
    SqueezerSpec,
    apply_beamsplitter,
    apply_loss,
    apply_phase_shift,
    apply_squeezer,
    pump_to_squeezing,
    quadrature_variance,
    vacuum,
)

__version__ = "0.1.0"
