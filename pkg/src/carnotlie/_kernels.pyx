# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled exact row reduction on int64 with overflow detection.

Same contract as :func:`carnotlie._kernels_py.rref_int`.  Raises
``OverflowError`` when an intermediate leaves the int64 range; the caller
then reruns the bigint fallback.
"""
from libc.stdlib cimport malloc, free

cdef extern from *:
    bint __builtin_mul_overflow(long long a, long long b, long long *res) nogil
    bint __builtin_sub_overflow(long long a, long long b, long long *res) nogil


cdef inline long long _gcd(long long a, long long b) noexcept nogil:
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        a, b = b, a % b
    return a


cdef int _normalize(long long *row, Py_ssize_t ncols, Py_ssize_t pcol) noexcept nogil:
    cdef long long g = 0
    cdef Py_ssize_t c
    for c in range(ncols):
        if row[c]:
            g = _gcd(g, row[c])
            if g == 1:
                break
    if g == 0:
        return 0
    if pcol >= 0 and row[pcol] < 0:
        g = -g
    if g != 1:
        for c in range(ncols):
            row[c] = row[c] // g
    return 0


cdef int _combine(long long *r, long long *prow, Py_ssize_t ncols,
                  Py_ssize_t col, Py_ssize_t own_pivot) noexcept nogil:
    # r <- (p/g) r - (a/g) prow ; returns 1 on overflow
    cdef long long a = r[col]
    cdef long long p = prow[col]
    cdef long long g = _gcd(a, p)
    cdef long long ps = p // g
    cdef long long as_ = a // g
    cdef long long t1, t2
    cdef Py_ssize_t c
    for c in range(ncols):
        if __builtin_mul_overflow(ps, r[c], &t1):
            return 1
        if prow[c]:
            if __builtin_mul_overflow(as_, prow[c], &t2):
                return 1
            if __builtin_sub_overflow(t1, t2, &t1):
                return 1
        r[c] = t1
    r[col] = 0
    _normalize(r, ncols, own_pivot)
    return 0


def rref_int(rows, Py_ssize_t ncols):
    cdef Py_ssize_t nrows = len(rows)
    cdef Py_ssize_t i, c, col, rank = 0, piv
    cdef long long *m
    cdef long long *prow
    cdef long long *r
    cdef Py_ssize_t *pcols
    cdef bint overflow = 0
    cdef long long v
    if nrows == 0 or ncols == 0:
        return [], []
    m = <long long *> malloc(nrows * ncols * sizeof(long long))
    pcols = <Py_ssize_t *> malloc(ncols * sizeof(Py_ssize_t))
    if m == NULL or pcols == NULL:
        free(m)
        free(pcols)
        raise MemoryError()
    try:
        for i in range(nrows):
            row = rows[i]
            for c in range(ncols):
                # raises OverflowError for entries outside int64
                v = row[c]
                m[i * ncols + c] = v
        with nogil:
            for col in range(ncols):
                if rank == nrows:
                    break
                piv = -1
                for i in range(rank, nrows):
                    if m[i * ncols + col]:
                        piv = i
                        break
                if piv < 0:
                    continue
                if piv != rank:
                    for c in range(ncols):
                        v = m[piv * ncols + c]
                        m[piv * ncols + c] = m[rank * ncols + c]
                        m[rank * ncols + c] = v
                prow = m + rank * ncols
                _normalize(prow, ncols, col)
                for i in range(nrows):
                    r = m + i * ncols
                    if i == rank or r[col] == 0:
                        continue
                    if _combine(r, prow, ncols, col, pcols[i] if i < rank else -1):
                        overflow = 1
                        break
                if overflow:
                    break
                pcols[rank] = col
                rank += 1
        if overflow:
            raise OverflowError("int64 overflow in row reduction")
        out = [[m[i * ncols + c] for c in range(ncols)] for i in range(rank)]
        return out, [pcols[i] for i in range(rank)]
    finally:
        free(m)
        free(pcols)
