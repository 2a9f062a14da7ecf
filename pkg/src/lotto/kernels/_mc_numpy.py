"""NumPy implementation of the selection kernel (fallback and reference).

Must stay bit-identical to ``_mc_native.pyx``: same counter-based generator,
same draw order, same integer arithmetic.
"""

from __future__ import annotations

import numpy as np

HONEST, BIASED, OMIT, OMIT_BIASED = 0, 1, 2, 3

_C1 = np.uint64(0x9E3779B97F4A7C15)
_C2 = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_S30, _S27, _S31 = np.uint64(30), np.uint64(27), np.uint64(31)

# rows of trials per vectorized block (bounds memory at n clients x rows)
_BLOCK_CELLS = 4_000_000


def mix64(z):
    z = (z ^ (z >> _S30)) * _M1
    z = (z ^ (z >> _S27)) * _M2
    return z ^ (z >> _S31)


def rand64(key: int, a, b):
    """Counter-based 64-bit draw for stream ``key`` at position (a, b)."""
    with np.errstate(over="ignore"):
        z = mix64(np.uint64(key) ^ (np.asarray(a, dtype=np.uint64) * _C1))
        return mix64(z ^ (np.asarray(b, dtype=np.uint64) * _C2))


def _draw_dishonest(select_key, trials, d, h, s, live):
    """Dishonest members among s uniform picks without replacement."""
    x = np.zeros_like(d)
    d_rem, h_rem = d.copy(), h.copy()
    for j in range(s):
        rem = d_rem + h_rem
        r = rand64(select_key, trials, np.uint64(j)) % np.maximum(rem, 1).astype(np.uint64)
        pick = live & (r < d_rem.astype(np.uint64))
        x += pick
        d_rem -= pick
        h_rem -= live & ~pick
    return x


def run_trials(key, select_key, n_honest, c, s, thr_hi, saturated, strategy, fraction, trial_start, trials):
    n = n_honest + c
    xs = np.empty(trials, dtype=np.int64)
    cands = np.empty(trials, dtype=np.int64)
    rows = max(1, _BLOCK_CELLS // max(n, 1))
    clients = np.arange(n, dtype=np.uint64)[None, :]
    thr = np.uint64(thr_hi)
    for lo in range(0, trials, rows):
        hi = min(trials, lo + rows)
        t = np.arange(trial_start + lo, trial_start + hi, dtype=np.uint64)
        if saturated:
            elig = np.ones((hi - lo, n), dtype=bool)
        else:
            elig = rand64(key, t[:, None], clients) < thr
        d = elig[:, :c].sum(axis=1, dtype=np.int64)
        h = elig[:, c:].sum(axis=1, dtype=np.int64)
        cands[lo:hi] = d + h
        if strategy in (OMIT, OMIT_BIASED):
            h = h - np.floor(fraction * h.astype(np.float64)).astype(np.int64)
        live = (d + h) >= s
        if strategy in (BIASED, OMIT_BIASED):
            x = np.minimum(d, s)
        else:
            x = _draw_dishonest(select_key, t, d, h, s, live)
        xs[lo:hi] = np.where(live, x, -1)
    return xs, cands
