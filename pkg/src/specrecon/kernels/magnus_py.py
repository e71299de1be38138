"""Numpy fallback for the cell-exponential propagation kernel.

One step advances (y, y') through exp(Omega) where Omega is the two-point
Gauss Magnus approximation for y'' = (q(x) - lambda) y on a single cell.
The step is exact when q is constant on the cell.
"""

import numpy as np

_SQRT3_12 = np.sqrt(3.0) / 12.0
_GUARD = 1e300


def propagate(qg1, qg2, h, lam, y0, dy0, full=False):
    """Propagate a batch of spectral points through all cells.

    Parameters
    ----------
    qg1, qg2 : (M,) complex
        Potential at the two Gauss points of each cell.
    h : float
        Cell width.
    lam : (L,) complex
        Spectral points, one propagation per entry.
    y0, dy0 : (L,) complex
        Initial values at x = 0.
    full : bool
        When True return (L, M+1) trajectories, else endpoint values.

    Returns
    -------
    (y, dy, overflowed) where overflowed is a bool flag.
    """
    lam = np.asarray(lam, dtype=complex)
    m = qg1.shape[0]
    y = np.array(y0, dtype=complex, copy=True)
    dy = np.array(dy0, dtype=complex, copy=True)
    if full:
        traj_y = np.empty((lam.shape[0], m + 1), dtype=complex)
        traj_dy = np.empty_like(traj_y)
        traj_y[:, 0] = y
        traj_dy[:, 0] = dy
    h2 = h * h
    overflow = False
    # runaway growth is caught by the guard below; silence the transient
    # inf/nan arithmetic it produces on the way there
    with np.errstate(over="ignore", invalid="ignore"):
        for i in range(m):
            w1 = qg1[i] - lam
            w2 = qg2[i] - lam
            wbar = 0.5 * (w1 + w2)
            alpha = (_SQRT3_12 * h2) * (w1 - w2)
            d2 = alpha * alpha + h2 * wbar
            d = np.sqrt(d2)
            e = np.exp(d)
            ei = 1.0 / e
            ch = 0.5 * (e + ei)
            sh = 0.5 * (e - ei)
            small = np.abs(d2) < 1e-6
            shd = np.where(small, 1.0 + d2 / 6.0 + d2 * d2 / 120.0,
                           sh / np.where(small, 1.0, d))
            a11 = ch + shd * alpha
            a12 = shd * h
            a21 = shd * h * wbar
            a22 = ch - shd * alpha
            y, dy = a11 * y + a12 * dy, a21 * y + a22 * dy
            if full:
                traj_y[:, i + 1] = y
                traj_dy[:, i + 1] = dy
            if i % 256 == 255 and np.max(np.abs(y)) > _GUARD:
                overflow = True
                break
        if not overflow and (np.max(np.abs(y)) > _GUARD
                             or not np.all(np.isfinite(y))):
            overflow = True
    if full:
        return traj_y, traj_dy, overflow
    return y, dy, overflow
