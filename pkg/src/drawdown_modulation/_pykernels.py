"""NumPy fallback for the compiled kernels in ``_kernels.pyx``.

Same signatures, same floating point operations in the same order. Paths are
vectorised instead of looped; per-row sums use ``np.cumsum`` so that they are
accumulated sequentially over paths exactly like the C loop.
"""

import numpy as np

MARKOWITZ = 0
MODULATED = 1
STATUS_BANKRUPT = 1
STATUS_BREACH = 2

TOL = 1e-12
# elements per (parameter, path) working array in grid_sums
_WORK = 1 << 20


def _run(values, idx, kind, gains, dmaxes):
    """Evolve a (params, paths) block; returns wealth, worst drawdown, status."""
    shape = (gains.shape[0], idx.shape[0])
    v = np.ones(shape)
    vmax = np.ones(shape)
    d = np.zeros(shape)
    worst = np.zeros(shape)
    g = gains[:, None]
    dm = dmaxes[:, None]
    status = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(idx.shape[1]):
            x = values[idx[:, k]][None, :]
            if kind == MODULATED:
                if np.any(d - (dm + TOL) > 0.0):
                    status |= STATUS_BREACH
                slack = np.maximum(dm - d, 0.0)
                f = g * (slack / (1.0 - d))
            else:
                f = g
            v = v + (f * v) * x
            if np.any(-TOL * vmax - v > 0.0):
                status |= STATUS_BANKRUPT
            v = np.maximum(v, 0.0)
            vmax = np.maximum(v, vmax)
            d = (vmax - v) / vmax
            worst = np.maximum(d, worst)
    return v, worst, status


def path_stats(values, idx, kind, gain, d_max, wealth, dstar):
    values = np.asarray(values, dtype=np.float64)
    idx = np.asarray(idx)
    v, worst, status = _run(values, idx, kind, np.array([gain], dtype=np.float64),
                            np.array([d_max], dtype=np.float64))
    wealth[:] = v[0]
    dstar[:] = worst[0]
    return status


def _accumulate(column, contrib):
    # sequential left-to-right sum seeded with the existing column value
    seeded = np.concatenate([column[:, None], contrib], axis=1)
    return np.cumsum(seeded, axis=1)[:, -1]


def grid_sums(values, idx, kind, gains, dmaxes, out):
    values = np.asarray(values, dtype=np.float64)
    idx = np.asarray(idx)
    gains = np.asarray(gains, dtype=np.float64)
    dmaxes = np.asarray(dmaxes, dtype=np.float64)
    n_paths = idx.shape[0]
    if gains.shape[0] == 0 or n_paths == 0:
        return 0
    block = max(1, _WORK // n_paths)
    status = 0
    for j0 in range(0, gains.shape[0], block):
        sl = slice(j0, j0 + block)
        v, worst, st = _run(values, idx, kind, gains[sl], dmaxes[sl])
        status |= st
        r = v - 1.0
        rows = out[sl]
        rows[:, 0] = _accumulate(rows[:, 0], r)
        rows[:, 1] = _accumulate(rows[:, 1], r * r)
        rows[:, 2] = _accumulate(rows[:, 2], worst)
        rows[:, 3] = _accumulate(rows[:, 3], worst * worst)
    return status
