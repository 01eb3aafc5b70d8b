"""Exact dynamics of superattracting skew products f(z, w) = (z^d, w^c + sum h_j(z) w^j).

The main entry points are :class:`SkewMap` (the map and its action on
Puiseux series and Berkovich points), :class:`PuiseuxSeries` and
:class:`BerkPoint`.  The remaining modules build on these: ``cover`` and
``markov`` code the invariant Cantor set, ``green`` and ``multiplicity``
evaluate its invariants, ``curves`` synthesizes the stable curves,
``normal`` reduces germs to skew form and ``complexdyn`` runs numeric
orbits in C^2.
"""

__version__ = "0.1.0"

from .berk import Ball, BerkPoint
from .errors import SkewBerkError
from .series import PuiseuxSeries
from .skew import SkewMap

__all__ = ["Ball", "BerkPoint", "PuiseuxSeries", "SkewBerkError", "SkewMap", "__version__"]
