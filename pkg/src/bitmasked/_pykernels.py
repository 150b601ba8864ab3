"""Pure numpy implementations of the hot kernels.

Every function here has a twin in ``_ckernels.pyx`` with the same signature
and results; ``bitmasked.kernels`` picks one at import time.
"""
import numpy as np

_EXACT_FLOAT = 1 << 53


def segment_sum(idx, vals, size, p):
    """Sum ``vals`` into ``size`` buckets given by ``idx``, modulo ``p``."""
    if idx.size == 0:
        return np.zeros(size, dtype=np.int64)
    if p == 2:
        return np.bincount(idx[vals != 0], minlength=size).astype(np.int64) & 1
    if idx.size * (p - 1) < _EXACT_FLOAT:
        out = np.bincount(idx, weights=vals.astype(np.float64), minlength=size)
        return np.mod(np.rint(out).astype(np.int64), p)
    # chunk so partial sums stay below 2**63
    out = np.zeros(size, dtype=np.int64)
    step = max(1, ((1 << 62) // (p - 1)) - 1)
    for start in range(0, idx.size, step):
        part = np.zeros(size, dtype=np.int64)
        np.add.at(part, idx[start:start + step], vals[start:start + step])
        out = np.mod(out + np.mod(part, p), p)
    return out


def dense_plain_product(layer, x, M, p):
    layer = np.asarray(layer, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    nz = np.flatnonzero(x)
    return segment_sum(layer[nz], x[nz], M, p)


def dense_masked_product(layer, x, M, lam, p):
    layer = np.asarray(layer, dtype=np.int64)
    x = np.asarray(x, dtype=np.int64)
    nz = np.flatnonzero(x)
    rows = layer[nz]
    vals = x[nz]
    out = np.empty((M, lam), dtype=np.int64)
    for t in range(lam):
        hit = ((nz >> t) & 1).astype(bool)
        out[:, t] = segment_sum(rows[hit], vals[hit], M, p)
    return out


def approximate_block(plain, masked, N, binary):
    plain = np.asarray(plain, dtype=np.int64)
    masked = np.asarray(masked, dtype=np.int64)
    lam = masked.shape[1]
    rows = np.flatnonzero(plain)
    a = plain[rows]
    bits = masked[rows]
    n_filtered = 0
    if not binary:
        ok = np.all((bits == 0) | (bits == a[:, None]), axis=1)
        n_filtered = int(rows.size - np.count_nonzero(ok))
        a = a[ok]
        bits = bits[ok]
    weights = np.left_shift(np.int64(1), np.arange(lam, dtype=np.int64))
    u = ((bits != 0).astype(np.int64) * weights).sum(axis=1)
    keep = u < N
    n_out = int(u.size - np.count_nonzero(keep))
    u = u[keep]
    a = a[keep]
    idx, first = np.unique(u, return_index=True)
    n_dup = int(u.size - idx.size)
    return idx.astype(np.int64), a[first].astype(np.int64), n_out, n_dup, n_filtered


def superset_decode(y1, y2, N):
    y1 = np.asarray(y1, dtype=np.uint8)
    y2 = np.asarray(y2, dtype=np.uint8)
    lam = y2.shape[1]
    rows = np.flatnonzero(y1)
    weights = np.left_shift(np.int64(1), np.arange(lam, dtype=np.int64))
    s = (y2[rows].astype(np.int64) * weights).sum(axis=1)
    return np.unique(s[s < N])


def remove_candidates(indptr, indices, y1, candidates):
    y1 = np.asarray(y1, dtype=np.uint8)
    kept = []
    checks = 0
    for c in np.asarray(candidates, dtype=np.int64):
        tests = y1[indices[indptr[c]:indptr[c + 1]]]
        neg = np.flatnonzero(tests == 0)
        if neg.size:
            checks += int(neg[0]) + 1
        else:
            checks += tests.size
            kept.append(c)
    return np.array(kept, dtype=np.int64), checks


def expansion_counts(nbrs, combos):
    """Total neighbourhood size (summed over layers) of each subset row of ``combos``."""
    nbrs = np.asarray(nbrs, dtype=np.int64)
    combos = np.asarray(combos, dtype=np.int64)
    if combos.shape[1] == 1:
        return np.full(combos.shape[0], nbrs.shape[1], dtype=np.int64)
    g = np.sort(nbrs[combos], axis=1)
    distinct = 1 + np.count_nonzero(np.diff(g, axis=1), axis=1)
    return distinct.sum(axis=1).astype(np.int64)
