"""Verifiable random participant selection for federated learning.

Subpackages: ``primitives`` (VRF, PRF, signatures), ``protocol`` (the
selection rounds), ``refinement`` (utility-based population pruning),
``bounds`` (analytic guarantees), ``simharness`` (adversarial simulation)
and ``kernels`` (compiled Monte Carlo core with a NumPy fallback).
"""

from ._manifest import VERSION as __version__

__all__ = ["__version__"]
