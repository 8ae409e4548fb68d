"""
EPR beams from two squeezed vacua
=================================

"""

import math

from cvepr import config
from cvepr.criterion import delta_epr
from cvepr.gaussian import BeamSplitterSpec, SqueezerSpec, apply_beamsplitter, apply_squeezer, vacuum
from cvepr.scenario import detected_state

# orthogonally squeezed inputs on a half beam splitter
r = -0.5 * math.log(0.68)
s = apply_squeezer(vacuum(2), 0, SqueezerSpec(r, 0.0))
s = apply_squeezer(s, 1, SqueezerSpec(r, math.pi / 2))
s = apply_beamsplitter(s, 0, 1, BeamSplitterSpec(0.5))
res = delta_epr(s, 0, 1)
print("lossless:", res)
print("entangled:", res.entangled, " (two vacua give exactly 1)")

# same thing, built from a scenario file with path and detector losses
cfg = config.load_preset("paper-fig3")
print("paths:", cfg.path_efficiency, " QE:", [d.quantum_efficiency for d in cfg.detectors])
print("with losses:", delta_epr(detected_state(cfg), 0, 1).delta_epr)

# with no relative phase the correlations vanish
from dataclasses import replace

flat = replace(cfg, relative_phase=0.0)
print("relative phase 0:", delta_epr(detected_state(flat), 0, 1).delta_epr)
