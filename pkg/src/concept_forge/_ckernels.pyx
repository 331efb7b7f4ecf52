# Compiled hot kernels. Must stay numerically in step with _pykernels.py
# (same genome layout, same operation order).
import numpy as np

cimport numpy as cnp
from libc.math cimport cos, exp, log1p, sin
from libc.stdlib cimport free, malloc

cnp.import_array()

cdef double AXIS_FLOOR = 1e-6


cdef inline double _softplus(double v) noexcept nogil:
    if v > 0.0:
        return v + log1p(exp(-v)) + AXIS_FLOOR
    return log1p(exp(v)) + AXIS_FLOOR


cdef void _build_transform(const double* axes, const double* angles,
                           Py_ssize_t n, double* rot, double* out) noexcept nogil:
    cdef Py_ssize_t i, j, r, idx = 0
    cdef double c, s, ri, rj
    for i in range(n):
        for j in range(n):
            rot[i * n + j] = 1.0 if i == j else 0.0
    for i in range(n):
        for j in range(i + 1, n):
            c = cos(angles[idx])
            s = sin(angles[idx])
            idx += 1
            for r in range(n):
                ri = rot[r * n + i]
                rj = rot[r * n + j]
                rot[r * n + i] = c * ri + s * rj
                rot[r * n + j] = -s * ri + c * rj
    for i in range(n):
        for j in range(n):
            out[i * n + j] = rot[j * n + i] / axes[i]


cdef void _count(const double[:, ::1] xs, const cnp.int64_t[::1] dims,
                 const double[:, ::1] centers, const double[:, ::1] transforms,
                 cnp.int64_t[:, ::1] cand, cnp.int64_t[::1] members,
                 cnp.int64_t[::1] labels, unsigned char* allin) noexcept nogil:
    cdef Py_ssize_t n_samples = xs.shape[0]
    cdef Py_ssize_t n_concepts = centers.shape[0]
    cdef Py_ssize_t n_spaces = dims.shape[0]
    cdef Py_ssize_t i, a, k, r, c, n, off, toff, n_any, hit
    cdef double q, z
    cdef bint any_in, all_in
    for i in range(n_samples):
        n_any = 0
        hit = -1
        for a in range(n_concepts):
            any_in = False
            all_in = True
            off = 0
            toff = 0
            for k in range(n_spaces):
                n = dims[k]
                q = 0.0
                for r in range(n):
                    z = 0.0
                    for c in range(n):
                        z = z + transforms[a, toff + r * n + c] * (xs[i, off + c] - centers[a, off + c])
                    q = q + z * z
                if q <= 1.0:
                    cand[a, k] += 1
                    any_in = True
                else:
                    all_in = False
                off += n
                toff += n * n
            allin[a] = all_in
            if any_in:
                n_any += 1
                hit = a
        if n_any == 1 and allin[hit]:
            labels[i] = hit
            members[hit] += 1
        else:
            labels[i] = -1


def softplus_axes(raw):
    cdef const double[::1] v = np.ascontiguousarray(raw, dtype=np.float64).ravel()
    out = np.empty(v.shape[0], dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        o[i] = _softplus(v[i])
    return out


def inverse_transform(axes, angles):
    cdef const double[::1] ax = np.ascontiguousarray(axes, dtype=np.float64)
    cdef const double[::1] an = np.ascontiguousarray(angles, dtype=np.float64)
    cdef Py_ssize_t n = ax.shape[0]
    if an.shape[0] != n * (n - 1) // 2:
        raise ValueError("expected %d rotation angles, got %d" % (n * (n - 1) // 2, an.shape[0]))
    out = np.empty((n, n), dtype=np.float64)
    rot = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] w = rot
    if n > 0:
        _build_transform(&ax[0], &an[0] if an.shape[0] else NULL, n, &w[0, 0], &o[0, 0])
    return out


def grid_counts(const double[:, ::1] xs, const cnp.int64_t[::1] dims,
                const double[:, ::1] centers, const double[:, ::1] transforms,
                cnp.int64_t[::1] labels):
    cdef Py_ssize_t n_concepts = centers.shape[0]
    cand = np.zeros((n_concepts, dims.shape[0]), dtype=np.int64)
    members = np.zeros(n_concepts, dtype=np.int64)
    cdef cnp.int64_t[:, ::1] cv = cand
    cdef cnp.int64_t[::1] mv = members
    cdef unsigned char* allin = <unsigned char*> malloc(n_concepts)
    if allin == NULL:
        raise MemoryError()
    try:
        with nogil:
            _count(xs, dims, centers, transforms, cv, mv, labels, allin)
    finally:
        free(allin)
    return cand, members


def genome_counts(const double[::1] genome, const double[:, ::1] xs,
                  const cnp.int64_t[::1] dims, Py_ssize_t n_concepts,
                  cnp.int64_t[::1] labels):
    cdef Py_ssize_t n_spaces = dims.shape[0]
    cdef Py_ssize_t k, a, i, n, g = 0, off, toff, total = 0, total_sq = 0, per = 0, nmax = 0
    for k in range(n_spaces):
        n = dims[k]
        total += n
        total_sq += n * n
        per += n * (n + 3) // 2
        if n > nmax:
            nmax = n
    if genome.shape[0] != n_concepts * per:
        raise ValueError("genome length %d does not match expected %d" % (genome.shape[0], n_concepts * per))
    centers = np.empty((n_concepts, total), dtype=np.float64)
    transforms = np.empty((n_concepts, total_sq), dtype=np.float64)
    cand = np.zeros((n_concepts, n_spaces), dtype=np.int64)
    members = np.zeros(n_concepts, dtype=np.int64)
    cdef double[:, ::1] cen = centers
    cdef double[:, ::1] tr = transforms
    cdef cnp.int64_t[:, ::1] cv = cand
    cdef cnp.int64_t[::1] mv = members
    cdef double* axes = <double*> malloc(nmax * sizeof(double))
    cdef double* rot = <double*> malloc(nmax * nmax * sizeof(double))
    cdef unsigned char* allin = <unsigned char*> malloc(n_concepts)
    if axes == NULL or rot == NULL or allin == NULL:
        free(axes)
        free(rot)
        free(allin)
        raise MemoryError()
    try:
        with nogil:
            for a in range(n_concepts):
                off = 0
                toff = 0
                for k in range(n_spaces):
                    n = dims[k]
                    for i in range(n):
                        cen[a, off + i] = genome[g + i]
                        axes[i] = _softplus(genome[g + n + i])
                    _build_transform(axes, &genome[g + 2 * n], n, rot, &tr[a, toff])
                    g += n * (n + 3) // 2
                    off += n
                    toff += n * n
            _count(xs, dims, cen, tr, cv, mv, labels, allin)
    finally:
        free(axes)
        free(rot)
        free(allin)
    return cand, members


def candidate_tensor(const double[:, ::1] xs, const cnp.int64_t[::1] dims,
                     const double[:, ::1] centers, const double[:, ::1] transforms):
    cdef Py_ssize_t n_samples = xs.shape[0]
    cdef Py_ssize_t n_concepts = centers.shape[0]
    cdef Py_ssize_t n_spaces = dims.shape[0]
    out = np.zeros((n_concepts, n_spaces, n_samples), dtype=np.bool_)
    cdef cnp.npy_bool[:, :, ::1] o = out
    cdef Py_ssize_t i, a, k, r, c, n, off, toff
    cdef double q, z
    with nogil:
        for a in range(n_concepts):
            off = 0
            toff = 0
            for k in range(n_spaces):
                n = dims[k]
                for i in range(n_samples):
                    q = 0.0
                    for r in range(n):
                        z = 0.0
                        for c in range(n):
                            z = z + transforms[a, toff + r * n + c] * (xs[i, off + c] - centers[a, off + c])
                        q = q + z * z
                    o[a, k, i] = q <= 1.0
                off += n
                toff += n * n
    return out
