# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled batch evaluation of the invariant over a corpus of distributions.

Corpus layout (CSR): distribution ``i`` owns entries ``offsets[i]:offsets[i+1]``
of ``base`` (index into the 12 base states), ``w`` and ``prob``.
A TauMap is packed as ``tau_n[12]`` row lengths and ``tau_dst``, ``tau_dw``,
``tau_p`` of shape ``(12, K)``.
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport log2
from libc.stdint cimport int64_t

cnp.import_array()

cdef double X_OF[12]
cdef double H_OF[12]
for _k in range(12):
    X_OF[_k] = 0.5 * (_k // 4)
    H_OF[_k] = 1.0 if _k // 4 == 1 else 0.0


cdef inline double h2(double p) nogil:
    if p <= 0.0 or p >= 1.0:
        return 0.0
    if p == 0.5:
        return 1.0
    return -(p * log2(p) + (1.0 - p) * log2(1.0 - p))


def phi_before(const int64_t[::1] offsets, const int64_t[::1] base,
               const int64_t[::1] w, const double[::1] prob):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t i, j
    cdef double mw, mb, mx, p
    with nogil:
        for i in range(n):
            mw = 0.0
            mb = 0.0
            mx = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                p = prob[j]
                mw += p * w[j]
                mb += p * H_OF[base[j]]
                mx += p * X_OF[base[j]]
            res[i] = mw - 0.5 * (mb + h2(mx))
    return out


def phi_after(const int64_t[::1] offsets, const int64_t[::1] base,
              const int64_t[::1] w, const double[::1] prob,
              const int64_t[::1] tau_n, const int64_t[:, ::1] tau_dst,
              const int64_t[:, ::1] tau_dw, const double[:, ::1] tau_p):
    cdef Py_ssize_t n = offsets.shape[0] - 1
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] res = out
    cdef Py_ssize_t i, j, r
    cdef int64_t b, k
    cdef double mw, mb, mx, p, q
    with nogil:
        for i in range(n):
            mw = 0.0
            mb = 0.0
            mx = 0.0
            for j in range(offsets[i], offsets[i + 1]):
                p = prob[j]
                b = base[j]
                for r in range(tau_n[b]):
                    q = p * tau_p[b, r]
                    k = tau_dst[b, r]
                    mw += q * (w[j] + tau_dw[b, r])
                    mb += q * H_OF[k]
                    mx += q * X_OF[k]
            res[i] = mw - 0.5 * (mb + h2(mx))
    return out
