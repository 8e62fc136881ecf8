"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in ``_core.pyx``.
The two are interchangeable; :mod:`hankellab.kernels` picks one at import.
"""

import numpy as np


def _sum_pyramid(mask):
    counts = mask.astype(np.int64)
    rows = [counts]
    while rows[-1].shape[0] > 1:
        r = rows[-1]
        rows.append(r[0::2] + r[1::2])
    pyramid = []
    for base in rows:
        cols = [base]
        while cols[-1].shape[1] > 1:
            c = cols[-1]
            cols.append(c[:, 0::2] + c[:, 1::2])
        pyramid.append(cols)
    return pyramid


def dyadic_enlarge(mask):
    """Cells where some dyadic rectangle through the cell is more than half full."""
    mask = np.ascontiguousarray(mask, dtype=bool)
    n1, n2 = mask.shape
    out = np.zeros_like(mask)
    pyramid = _sum_pyramid(mask)
    for s, cols in enumerate(pyramid):
        for t, counts in enumerate(cols):
            dense = 2 * counts > (1 << (s + t))
            if dense.any():
                out |= np.repeat(np.repeat(dense, 1 << s, axis=0), 1 << t, axis=1)
    return out


def grid_enlarge(mask):
    """Same as :func:`dyadic_enlarge` but over every cell-aligned rectangle."""
    mask = np.ascontiguousarray(mask, dtype=bool)
    n1, n2 = mask.shape
    sat = np.zeros((n1 + 1, n2 + 1), dtype=np.int64)
    sat[1:, 1:] = mask.astype(np.int64).cumsum(0).cumsum(1)
    diff = np.zeros((n1 + 1, n2 + 1), dtype=np.int64)
    for h in range(1, n1 + 1):
        for w in range(1, n2 + 1):
            total = sat[h:, w:] - sat[:-h, w:] - sat[h:, :-w] + sat[:-h, :-w]
            i, j = np.nonzero(2 * total > h * w)
            if i.size == 0:
                continue
            np.add.at(diff, (i, j), 1)
            np.add.at(diff, (i + h, j), -1)
            np.add.at(diff, (i, j + w), -1)
            np.add.at(diff, (i + h, j + w), 1)
    return diff.cumsum(0).cumsum(1)[:n1, :n2] > 0


def box_stab_sums(x1, x2, lo1, hi1, lo2, hi2, weight):
    """For each point, the total weight of half-open boxes containing it."""
    x1 = np.asarray(x1, dtype=np.float64)
    x2 = np.asarray(x2, dtype=np.float64)
    out = np.zeros(x1.shape[0])
    chunk = max(1, 2_000_000 // max(1, len(weight)))
    for start in range(0, x1.shape[0], chunk):
        a = x1[start:start + chunk, None]
        b = x2[start:start + chunk, None]
        hit = (lo1 <= a) & (a < hi1) & (lo2 <= b) & (b < hi2)
        out[start:start + chunk] = hit @ weight
    return out


def counting_sum(values, h, x, lam):
    """Sum of |J| * inf_J g over dyadic J of the grid with x in lam*J."""
    g = np.asarray(values, dtype=np.float64)
    total = 0.0
    level = g
    length = h
    while True:
        idx = np.arange(level.shape[0])
        centers = (idx + 0.5) * length
        half = 0.5 * lam * length
        hit = (centers - half <= x) & (x < centers + half) & (level > 0)
        total += length * level[hit].sum()
        if level.shape[0] == 1:
            break
        level = np.minimum(level[0::2], level[1::2])
        length *= 2
    return total


def lowrank_lq_power_sum(P, Q, q):
    """Sum over (x, y) of |sum_l P[x, l] Q[y, l]|**q."""
    P = np.ascontiguousarray(P, dtype=np.complex128)
    Q = np.ascontiguousarray(Q, dtype=np.complex128)
    total = 0.0
    chunk = max(1, 4_000_000 // max(1, Q.shape[0]))
    for start in range(0, P.shape[0], chunk):
        block = P[start:start + chunk] @ Q.T
        total += float(np.sum(np.abs(block) ** q))
    return total
