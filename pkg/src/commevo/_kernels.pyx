# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot loop: ordered products of exponentials of strictly upper triangular matrices."""

cdef enum:
    NMAX = 8


def nilpotent_chain(double complex[:, :, ::1] gens, double[::1] durations,
                    double complex[:, ::1] acc):
    """Replace ``acc`` by ``exp(G[m-1] d[m-1]) ... exp(G[0] d[0]) @ acc`` in place.

    Every ``G[j]`` must be strictly upper triangular of size ``n <= 8``; the
    exponential series terminates after ``n - 1`` terms and is applied to
    each column of ``acc`` term by term.
    """
    cdef Py_ssize_t m = gens.shape[0]
    cdef Py_ssize_t n = gens.shape[1]
    cdef Py_ssize_t k = acc.shape[1]
    cdef Py_ssize_t j, a, b, c, p
    cdef double complex w[NMAX]
    cdef double complex w2[NMAX]
    cdef double complex v[NMAX]
    cdef double complex s
    cdef double scale
    if n > NMAX or gens.shape[2] != n or acc.shape[0] != n or durations.shape[0] != m:
        raise ValueError("shape mismatch or dimension above 8")
    for j in range(m):
        for c in range(k):
            for a in range(n):
                w[a] = acc[a, c]
                v[a] = w[a]
            for p in range(1, n):
                scale = durations[j] / p
                # w <- (G d / p) w ; row a only sees entries b > a
                for a in range(n - p):
                    s = 0.0
                    for b in range(a + 1, n):
                        s = s + gens[j, a, b] * w[b]
                    w2[a] = s * scale
                for a in range(n - p, n):
                    w2[a] = 0.0
                for a in range(n):
                    w[a] = w2[a]
                    v[a] = v[a] + w[a]
            for a in range(n):
                acc[a, c] = v[a]
    return acc


def superdiag_chain(double complex[:, ::1] coefs, double[::1] durations,
                    double complex[:, ::1] acc):
    """Same as :func:`nilpotent_chain` for ``G = sum_k coefs[j, k] E_{k,k+1} + coefs[j, n-1] E_{1,n}``.

    ``coefs`` has shape ``(m, n)``: ``n - 1`` super-diagonal entries followed
    by the corner entry.
    """
    cdef Py_ssize_t m = coefs.shape[0]
    cdef Py_ssize_t n = coefs.shape[1]
    cdef Py_ssize_t k = acc.shape[1]
    cdef Py_ssize_t j, a, c, p
    cdef double complex w[NMAX]
    cdef double complex v[NMAX]
    cdef double complex corner
    cdef double scale
    cdef double complex a1, a2, x0, x1, x2
    cdef double h
    if n > NMAX or n < 2 or acc.shape[0] != n or durations.shape[0] != m:
        raise ValueError("shape mismatch or dimension above 8")
    if n == 3:
        # closed form of exp(G h) for the 3x3 case
        for j in range(m):
            h = durations[j]
            a1 = coefs[j, 0] * h
            a2 = coefs[j, 1] * h
            corner = coefs[j, 2] * h + 0.5 * a1 * a2
            for c in range(k):
                x1 = acc[1, c]
                x2 = acc[2, c]
                acc[0, c] = acc[0, c] + a1 * x1 + corner * x2
                acc[1, c] = x1 + a2 * x2
        return acc
    for j in range(m):
        corner = coefs[j, n - 1]
        for c in range(k):
            for a in range(n):
                w[a] = acc[a, c]
                v[a] = w[a]
            for p in range(1, n):
                scale = durations[j] / p
                # row 0 picks up the corner before w is overwritten
                w[0] = (coefs[j, 0] * w[1] + corner * w[n - 1]) * scale
                for a in range(1, n - 1):
                    w[a] = coefs[j, a] * w[a + 1] * scale
                w[n - 1] = 0.0
                for a in range(n):
                    v[a] = v[a] + w[a]
            for a in range(n):
                acc[a, c] = v[a]
    return acc
