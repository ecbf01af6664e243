"""Pseudo-spectral laboratory for shear-frame perturbations of Couette flow.

Subpackages cover the truncated Fourier layer, the time-dependent multiplier
weights, the three model right-hand sides, integrating-factor time stepping,
weighted-energy diagnostics, the resonance-cascade toy model, and the
sweep/bisection harness with its CLI.
"""

__version__ = "0.1.0"
