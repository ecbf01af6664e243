"""Publication-style figures from the simulation harness CSV outputs.

This package reads only the published CSV schemas (energy series, threshold
sweeps, weight-table dumps); it never imports the solver.
"""

__version__ = "0.1.0"
