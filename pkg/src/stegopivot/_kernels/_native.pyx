# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations (semantics mirror _fallback exactly)."""

BACKEND = "native"


def add_k_fill(double[::1] out, long[::1] ids, double[::1] counts,
               double total, double k):
    cdef Py_ssize_t m = out.shape[0]
    cdef Py_ssize_t n = ids.shape[0]
    cdef double denom = total + k * m
    cdef double base = k / denom
    cdef Py_ssize_t i
    for i in range(m):
        out[i] = base
    for i in range(n):
        out[ids[i]] += counts[i] / denom


def renormalize_excluding(double[::1] probs, long[::1] excluded_ids):
    cdef Py_ssize_t m = probs.shape[0]
    cdef Py_ssize_t n = excluded_ids.shape[0]
    cdef Py_ssize_t i
    cdef double s = 0.0
    for i in range(n):
        probs[excluded_ids[i]] = 0.0
    for i in range(m):
        s += probs[i]
    if s <= 0.0:
        raise ValueError("all probability mass excluded")
    for i in range(m):
        probs[i] /= s


def argmax_subset(double[::1] probs, long[::1] candidate_ids):
    cdef Py_ssize_t n = candidate_ids.shape[0]
    cdef Py_ssize_t i
    cdef long best_id = candidate_ids[0]
    cdef double best = probs[best_id]
    cdef double p
    for i in range(1, n):
        p = probs[candidate_ids[i]]
        if p > best:
            best = p
            best_id = candidate_ids[i]
    return best_id
