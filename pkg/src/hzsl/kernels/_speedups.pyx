# cython: boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled tree-pass kernels: prefix sums along root paths and subtree sums."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


cdef void _path_sums_1d(cnp.int64_t[::1] parent, cnp.int64_t[::1] order,
                        cnp.float64_t[::1] out) nogil:
    cdef Py_ssize_t i
    cdef cnp.int64_t v
    for i in range(1, order.shape[0]):
        v = order[i]
        out[v] += out[parent[v]]


cdef void _path_sums_2d(cnp.int64_t[::1] parent, cnp.int64_t[::1] order,
                        cnp.float64_t[:, ::1] out) nogil:
    cdef Py_ssize_t i, b
    cdef cnp.int64_t v
    for i in range(1, order.shape[0]):
        v = order[i]
        for b in range(out.shape[0]):
            out[b, v] += out[b, parent[v]]


cdef void _subtree_sums_1d(cnp.int64_t[::1] parent, cnp.int64_t[::1] order,
                           cnp.float64_t[::1] out) nogil:
    cdef Py_ssize_t i
    cdef cnp.int64_t v
    for i in range(order.shape[0] - 1, 0, -1):
        v = order[i]
        out[parent[v]] += out[v]


cdef void _subtree_sums_2d(cnp.int64_t[::1] parent, cnp.int64_t[::1] order,
                           cnp.float64_t[:, ::1] out) nogil:
    cdef Py_ssize_t i, b
    cdef cnp.int64_t v
    for i in range(order.shape[0] - 1, 0, -1):
        v = order[i]
        for b in range(out.shape[0]):
            out[b, parent[v]] += out[b, v]


def path_sums(parent, order, terms):
    """out[v] = terms[v] + out[parent[v]] in topological order; terms (N,) or (B, N)."""
    terms = np.ascontiguousarray(terms, dtype=np.float64)
    out = terms.copy()
    if terms.ndim == 1:
        _path_sums_1d(parent, order, out)
    elif terms.ndim == 2:
        _path_sums_2d(parent, order, out)
    else:
        raise ValueError("terms must be 1- or 2-dimensional")
    return out


def subtree_sums(parent, order, values):
    """out[v] = values[v] + sum over children; values (N,) or (B, N)."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    out = values.copy()
    if values.ndim == 1:
        _subtree_sums_1d(parent, order, out)
    elif values.ndim == 2:
        _subtree_sums_2d(parent, order, out)
    else:
        raise ValueError("values must be 1- or 2-dimensional")
    return out
