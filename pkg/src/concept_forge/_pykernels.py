"""Numpy implementation of the membership kernels.

Used when the compiled extension is unavailable or when
``CONCEPT_FORGE_BACKEND=python`` is set. Same signatures as ``_ckernels``.
"""
import numpy as np

AXIS_FLOOR = 1e-6


def softplus_axes(raw):
    v = np.asarray(raw, dtype=np.float64).ravel()
    # log1p(exp(-|v|)) + max(v, 0) is the overflow-safe form
    return np.where(v > 0.0, v + np.log1p(np.exp(-np.abs(v))), np.log1p(np.exp(np.minimum(v, 0.0)))) + AXIS_FLOOR


def inverse_transform(axes, angles):
    axes = np.asarray(axes, dtype=np.float64)
    angles = np.asarray(angles, dtype=np.float64)
    n = axes.shape[0]
    if angles.shape[0] != n * (n - 1) // 2:
        raise ValueError(f"expected {n * (n - 1) // 2} rotation angles, got {angles.shape[0]}")
    rot = np.eye(n)
    idx = 0
    for i in range(n):
        for j in range(i + 1, n):
            c, s = np.cos(angles[idx]), np.sin(angles[idx])
            idx += 1
            ri, rj = rot[:, i].copy(), rot[:, j].copy()
            rot[:, i] = c * ri + s * rj
            rot[:, j] = -s * ri + c * rj
    return rot.T / axes[:, None]


def candidate_tensor(xs, dims, centers, transforms):
    n_concepts = centers.shape[0]
    out = np.zeros((n_concepts, len(dims), xs.shape[0]), dtype=bool)
    for a in range(n_concepts):
        off = toff = 0
        for k, n in enumerate(dims):
            n = int(n)
            t = transforms[a, toff:toff + n * n].reshape(n, n)
            z = (xs[:, off:off + n] - centers[a, off:off + n]) @ t.T
            out[a, k] = np.einsum("ij,ij->i", z, z) <= 1.0
            off += n
            toff += n * n
    return out


def _counts_from_tensor(cand, labels):
    any_in = cand.any(axis=1)
    all_in = cand.all(axis=1)
    exclusive = any_in.sum(axis=0) == 1
    hit = np.argmax(any_in, axis=0)
    ok = exclusive & all_in[hit, np.arange(cand.shape[2])]
    labels[:] = np.where(ok, hit, -1)
    members = np.bincount(labels[ok], minlength=cand.shape[0]).astype(np.int64)
    return cand.sum(axis=2).astype(np.int64), members


def grid_counts(xs, dims, centers, transforms, labels):
    return _counts_from_tensor(candidate_tensor(xs, dims, centers, transforms), labels)


def genome_counts(genome, xs, dims, n_concepts, labels):
    genome = np.asarray(genome, dtype=np.float64)
    per = sum(int(n) * (int(n) + 3) // 2 for n in dims)
    if genome.shape[0] != n_concepts * per:
        raise ValueError(f"genome length {genome.shape[0]} does not match expected {n_concepts * per}")
    total = sum(int(n) for n in dims)
    centers = np.empty((n_concepts, total))
    transforms = np.empty((n_concepts, sum(int(n) ** 2 for n in dims)))
    g = 0
    for a in range(n_concepts):
        off = toff = 0
        for n in dims:
            n = int(n)
            centers[a, off:off + n] = genome[g:g + n]
            axes = softplus_axes(genome[g + n:g + 2 * n])
            transforms[a, toff:toff + n * n] = inverse_transform(axes, genome[g + 2 * n:g + n * (n + 3) // 2]).ravel()
            g += n * (n + 3) // 2
            off += n
            toff += n * n
    return grid_counts(xs, dims, centers, transforms, labels)
