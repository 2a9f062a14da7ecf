"""Monte Carlo selection kernel, native when built, NumPy otherwise.

Each trial draws one 64-bit value per client from a counter-based generator
(splitmix64 finalizer over (key, trial, client)); a client is a candidate iff
that value is below ``floor(T * 2**64 / m)``, so the per-client probability
never exceeds the protocol's T/m and differs from it by under 2**-64.
Clients ``0..c-1`` are the dishonest ones (ids are exchangeable).

``LOTTO_PURE_PYTHON=1`` forces the NumPy path.
"""

from __future__ import annotations

import os

from . import _mc_numpy
from ._mc_numpy import BIASED, HONEST, OMIT, OMIT_BIASED

_native = None
if not os.environ.get("LOTTO_PURE_PYTHON"):
    try:
        from . import _mc_native as _native
    except ImportError:
        _native = None

BACKEND = "native" if _native is not None else "numpy"


def threshold_hi(threshold: int, m: int) -> tuple[int, bool]:
    """(64-bit comparison threshold, saturated flag) for T over range m."""
    if threshold >= m:
        return 0, True
    return (threshold << 64) // m, False


def run_trials(
    key: int,
    select_key: int,
    n_honest: int,
    c: int,
    s: int,
    threshold: int,
    m: int,
    strategy: int = HONEST,
    fraction: float = 0.0,
    trial_start: int = 0,
    trials: int = 1,
    backend: str | None = None,
):
    """Returns ``(x, candidates)`` arrays; ``x == -1`` marks an aborted trial."""
    hi, saturated = threshold_hi(threshold, m)
    impl = {"native": _native, "numpy": _mc_numpy, None: _native or _mc_numpy}[backend]
    if impl is None:
        raise RuntimeError("native kernel not built")
    return impl.run_trials(
        key & (2**64 - 1),
        select_key & (2**64 - 1),
        n_honest,
        c,
        s,
        hi,
        saturated,
        strategy,
        float(fraction),
        trial_start,
        trials,
    )


__all__ = ["BACKEND", "BIASED", "HONEST", "OMIT", "OMIT_BIASED", "run_trials", "threshold_hi"]
