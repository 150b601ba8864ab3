# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the kernels in ``_pykernels``."""
import numpy as np

from libc.stdint cimport int64_t, uint8_t, uint64_t


cdef inline uint64_t addmod(uint64_t a, uint64_t b, uint64_t p) noexcept nogil:
    # a, b < p < 2**61, so the sum never wraps
    a += b
    if a >= p:
        a -= p
    return a


def dense_plain_product(layer, x, Py_ssize_t M, uint64_t p):
    cdef const int64_t[::1] lay = np.ascontiguousarray(layer, dtype=np.int64)
    cdef const int64_t[::1] xv = np.ascontiguousarray(x, dtype=np.int64)
    out = np.zeros(M, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef Py_ssize_t j, n = xv.shape[0]
    cdef int64_t q
    with nogil:
        for j in range(n):
            if xv[j] != 0:
                q = lay[j]
                o[q] = <int64_t>addmod(<uint64_t>o[q], <uint64_t>xv[j], p)
    return out


def dense_masked_product(layer, x, Py_ssize_t M, Py_ssize_t lam, uint64_t p):
    cdef const int64_t[::1] lay = np.ascontiguousarray(layer, dtype=np.int64)
    cdef const int64_t[::1] xv = np.ascontiguousarray(x, dtype=np.int64)
    out = np.zeros((M, lam), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef Py_ssize_t j, t, n = xv.shape[0]
    cdef int64_t q, v
    with nogil:
        for j in range(n):
            v = xv[j]
            if v != 0:
                q = lay[j]
                for t in range(lam):
                    if (j >> t) & 1:
                        o[q, t] = <int64_t>addmod(<uint64_t>o[q, t], <uint64_t>v, p)
    return out


def approximate_block(plain, masked, int64_t N, bint binary):
    cdef const int64_t[::1] pl = np.ascontiguousarray(plain, dtype=np.int64)
    cdef const int64_t[:, ::1] mk = np.ascontiguousarray(masked, dtype=np.int64)
    cdef Py_ssize_t M = pl.shape[0], lam = mk.shape[1], q, t
    us = np.empty(M, dtype=np.int64)
    vs = np.empty(M, dtype=np.int64)
    cdef int64_t[::1] uo = us
    cdef int64_t[::1] vo = vs
    cdef Py_ssize_t count = 0, n_out = 0, n_filtered = 0
    cdef int64_t a, m, u
    cdef bint ok
    with nogil:
        for q in range(M):
            a = pl[q]
            if a == 0:
                continue
            u = 0
            ok = True
            for t in range(lam):
                m = mk[q, t]
                if m != 0:
                    if not binary and m != a:
                        ok = False
                        break
                    u |= (<int64_t>1) << t
            if not ok:
                n_filtered += 1
                continue
            if u >= N:
                n_out += 1
                continue
            uo[count] = u
            vo[count] = a
            count += 1
    u_arr = us[:count]
    idx, first = np.unique(u_arr, return_index=True)
    n_dup = count - idx.size
    return idx.astype(np.int64), vs[:count][first], n_out, int(n_dup), n_filtered


def superset_decode(y1, y2, int64_t N):
    cdef const uint8_t[::1] a = np.ascontiguousarray(y1, dtype=np.uint8)
    cdef const uint8_t[:, ::1] b = np.ascontiguousarray(y2, dtype=np.uint8)
    cdef Py_ssize_t M = a.shape[0], lam = b.shape[1], q, t
    found = np.empty(M, dtype=np.int64)
    cdef int64_t[::1] f = found
    cdef Py_ssize_t count = 0
    cdef int64_t s
    with nogil:
        for q in range(M):
            if not a[q]:
                continue
            s = 0
            for t in range(lam):
                if b[q, t]:
                    s |= (<int64_t>1) << t
            if s < N:
                f[count] = s
                count += 1
    return np.unique(found[:count])


def remove_candidates(indptr, indices, y1, candidates):
    cdef const int64_t[::1] ip = np.ascontiguousarray(indptr, dtype=np.int64)
    cdef const int64_t[::1] ix = np.ascontiguousarray(indices, dtype=np.int64)
    cdef const uint8_t[::1] y = np.ascontiguousarray(y1, dtype=np.uint8)
    cdef const int64_t[::1] cand = np.ascontiguousarray(candidates, dtype=np.int64)
    cdef Py_ssize_t n = cand.shape[0], i, k
    kept = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] ko = kept
    cdef Py_ssize_t nkept = 0
    cdef int64_t checks = 0, c
    cdef bint contained
    with nogil:
        for i in range(n):
            c = cand[i]
            contained = True
            for k in range(ip[c], ip[c + 1]):
                checks += 1
                if not y[ix[k]]:
                    contained = False
                    break
            if contained:
                ko[nkept] = c
                nkept += 1
    return kept[:nkept].copy(), int(checks)


def expansion_counts(nbrs, combos):
    cdef const int64_t[:, ::1] g = np.ascontiguousarray(nbrs, dtype=np.int64)
    cdef const int64_t[:, ::1] cb = np.ascontiguousarray(combos, dtype=np.int64)
    cdef Py_ssize_t c = cb.shape[0], k = cb.shape[1], D = g.shape[1]
    cdef Py_ssize_t i, s, a, b
    out = np.empty(c, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t total, v
    cdef bint fresh
    with nogil:
        for i in range(c):
            total = 0
            for s in range(D):
                for a in range(k):
                    v = g[cb[i, a], s]
                    fresh = True
                    for b in range(a):
                        if g[cb[i, b], s] == v:
                            fresh = False
                            break
                    if fresh:
                        total += 1
            o[i] = total
    return out
