"""Counting functions, Beurling-Malliavin certificates and upper Polya density estimates.

Modules:

* :mod:`~density_lab.seqcore` - sequences and exact counting oracles
* :mod:`~density_lab.intervals` - interval families, splitting lemmas, certificates
* :mod:`~density_lab.covering` - the exact eta-covering and its bounds
* :mod:`~density_lab.density` - Polya density estimates, weighted Fekete check, family extraction
* :mod:`~density_lab.cli` - the ``density-lab`` command
"""

from .errors import ConsequenceViolation, DensityLabError, ValidationError

__version__ = "0.1.0"

__all__ = ["ConsequenceViolation", "DensityLabError", "ValidationError", "__version__"]
