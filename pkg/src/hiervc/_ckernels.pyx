# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``; same results, faster."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, sqrt, cos, sin
from libc.stdint cimport uint64_t, uint8_t, int64_t

cnp.import_array()

cdef double TWO_PI = 2.0 * 3.141592653589793
cdef double INV_2_53 = 1.0 / 9007199254740992.0


def full_search(const uint8_t[:, ::1] cur, const uint8_t[:, ::1] ref_padded,
                int x, int y, int pad, int rng):
    cdef int n = cur.shape[0]
    cdef int dx, dy, i, j, d, bx = 0, by = 0
    cdef int64_t sad, best = -1
    cdef int cost, best_cost = 0
    cdef int yy, xx
    for dy in range(-rng, rng + 1):
        for dx in range(-rng, rng + 1):
            sad = 0
            yy = y + pad + dy
            xx = x + pad + dx
            for i in range(n):
                for j in range(n):
                    d = <int>cur[i, j] - <int>ref_padded[yy + i, xx + j]
                    sad += d if d >= 0 else -d
                if best >= 0 and sad > best:
                    break
            if best < 0 or sad < best:
                best = sad
                bx = dx
                by = dy
                best_cost = abs(dx) + abs(dy)
            elif sad == best:
                cost = abs(dx) + abs(dy)
                # Row-major scan already visits smaller dy first.
                if cost < best_cost:
                    bx = dx
                    by = dy
                    best_cost = cost
    return bx, by, int(best)


cdef inline uint64_t rotl(uint64_t v, int k) nogil:
    return (v << k) | (v >> (64 - k))


cdef inline uint64_t xoshiro_next(uint64_t* s) nogil:
    cdef uint64_t result = rotl(s[1] * 5, 7) * 9
    cdef uint64_t t = s[1] << 17
    s[2] ^= s[0]
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = rotl(s[3], 45)
    return result


def xoshiro_uint64(state, Py_ssize_t n):
    cdef uint64_t s[4]
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = <uint64_t>state[i]
    out = np.empty(n, dtype=np.uint64)
    cdef uint64_t[::1] o = out
    for i in range(n):
        o[i] = xoshiro_next(s)
    return out, (int(s[0]), int(s[1]), int(s[2]), int(s[3]))


def xoshiro_gaussian(state, Py_ssize_t n):
    cdef uint64_t s[4]
    cdef uint64_t a, b
    cdef double u1, u2, r, theta
    cdef Py_ssize_t i
    for i in range(4):
        s[i] = <uint64_t>state[i]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    i = 0
    while i < n:
        a = xoshiro_next(s)
        b = xoshiro_next(s)
        u1 = <double>((a >> 11) + 1) * INV_2_53
        u2 = <double>(b >> 11) * INV_2_53
        r = sqrt(-2.0 * log(u1))
        theta = TWO_PI * u2
        o[i] = r * cos(theta)
        if i + 1 < n:
            o[i + 1] = r * sin(theta)
        i += 2
    return out, (int(s[0]), int(s[1]), int(s[2]), int(s[3]))
