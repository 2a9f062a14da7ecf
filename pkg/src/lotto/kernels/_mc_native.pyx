# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Native selection kernel; bit-identical to ``_mc_numpy``."""

import numpy as np
from libc.math cimport floor
from libc.stdint cimport int64_t, uint64_t

cdef enum:
    HONEST = 0
    BIASED = 1
    OMIT = 2
    OMIT_BIASED = 3


cdef inline uint64_t mix64(uint64_t z) nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t rand64(uint64_t key, uint64_t a, uint64_t b) nogil:
    return mix64(mix64(key ^ (a * 0x9E3779B97F4A7C15ULL)) ^ (b * 0xD1B54A32D192ED03ULL))


def run_trials(uint64_t key, uint64_t select_key, int64_t n_honest, int64_t c, int64_t s,
               uint64_t thr_hi, bint saturated, int strategy, double fraction,
               int64_t trial_start, int64_t trials):
    cdef int64_t n = n_honest + c
    xs_arr = np.empty(trials, dtype=np.int64)
    cands_arr = np.empty(trials, dtype=np.int64)
    cdef int64_t[::1] xs = xs_arr
    cdef int64_t[::1] cands = cands_arr
    cdef int64_t i, j, d, h, x, d_rem, h_rem
    cdef uint64_t t, rem, r
    with nogil:
        for i in range(trials):
            t = <uint64_t>(trial_start + i)
            d = 0
            h = 0
            for j in range(n):
                if saturated or rand64(key, t, <uint64_t>j) < thr_hi:
                    if j < c:
                        d += 1
                    else:
                        h += 1
            cands[i] = d + h
            if strategy == OMIT or strategy == OMIT_BIASED:
                h = h - <int64_t>floor(fraction * <double>h)
            if d + h < s:
                xs[i] = -1
                continue
            if strategy == BIASED or strategy == OMIT_BIASED:
                xs[i] = d if d < s else s
                continue
            x = 0
            d_rem = d
            h_rem = h
            for j in range(s):
                rem = <uint64_t>(d_rem + h_rem)
                r = rand64(select_key, t, <uint64_t>j) % rem
                if r < <uint64_t>d_rem:
                    x += 1
                    d_rem -= 1
                else:
                    h_rem -= 1
            xs[i] = x
    return xs_arr, cands_arr
