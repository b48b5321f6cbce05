"""Compiled inner loops for long Volterra trajectories.

The state is carried as log-coordinates. Along heteroclinic cycles a
coordinate can shrink below the smallest float64 long before the trajectory
comes back; in linear arithmetic it would underflow to an exact zero and the
orbit would be frozen on a face, which the exact dynamics never does. In log
space a coordinate is zero only if it started at zero (``-inf``), so faces stay
invariant exactly and interior orbits stay interior.
"""

import os

import numba
import numpy as np

# TBB in some images is too old for numba and only produces a warning
if "NUMBA_THREADING_LAYER" not in os.environ:
    numba.config.THREADING_LAYER = "workqueue"

NEG_INF = -np.inf


@numba.njit(cache=True, inline="always")
def _log_step(logw, lx, out):
    m = lx.shape[0]
    for k in range(m):
        if lx[k] == NEG_INF:
            out[k] = NEG_INF
            continue
        mx = NEG_INF
        for i in range(m):
            t = logw[k, i] + lx[i]
            if t > mx:
                mx = t
        acc = 0.0
        for i in range(m):
            t = logw[k, i] + lx[i]
            if t != NEG_INF:
                acc += np.exp(t - mx)
        out[k] = lx[k] + mx + np.log(acc)
    top = NEG_INF
    for k in range(m):
        if out[k] > top:
            top = out[k]
    tot = 0.0
    for k in range(m):
        tot += np.exp(out[k] - top)
    shift = top + np.log(tot)
    for k in range(m):
        out[k] -= shift


@numba.njit(cache=True)
def log_trajectory(logw, lx0, n):
    """Points x^(0..n) as an (n+1, m) array, plus the final log-state."""
    m = lx0.shape[0]
    pts = np.empty((n + 1, m))
    lx = lx0.copy()
    nxt = np.empty(m)
    for k in range(m):
        pts[0, k] = np.exp(lx[k])
    for step in range(1, n + 1):
        _log_step(logw, lx, nxt)
        lx, nxt = nxt, lx
        for k in range(m):
            pts[step, k] = np.exp(lx[k])
    return pts, lx


@numba.njit(cache=True)
def _cesaro_one(logw, lx0, checkpoints, means):
    # means[c] = (1/n_c) sum_{k < n_c} x^(k), Kahan-compensated
    m = lx0.shape[0]
    lx = lx0.copy()
    nxt = np.empty(m)
    s = np.zeros(m)
    comp = np.zeros(m)
    c = 0
    n_last = checkpoints[checkpoints.shape[0] - 1]
    for step in range(n_last):
        for k in range(m):
            y = np.exp(lx[k]) - comp[k]
            t = s[k] + y
            comp[k] = (t - s[k]) - y
            s[k] = t
        if step + 1 == checkpoints[c]:
            tot = 0.0
            for k in range(m):
                tot += s[k]
            for k in range(m):
                means[c, k] = s[k] / tot
            c += 1
        if step + 1 < n_last:
            _log_step(logw, lx, nxt)
            lx, nxt = nxt, lx


@numba.njit(cache=True, parallel=True)
def cesaro_batch(logw, lx0s, checkpoints):
    """Checkpoint means for each start (rows of ``lx0s``); (starts, cps, m)."""
    n0 = lx0s.shape[0]
    out = np.zeros((n0, checkpoints.shape[0], lx0s.shape[1]))
    for r in numba.prange(n0):
        _cesaro_one(logw, lx0s[r], checkpoints, out[r])
    return out


@numba.njit(cache=True)
def kahan_checkpoint_means(points, checkpoints):
    """Compensated running means of the rows of ``points`` at 1-based counts."""
    m = points.shape[1]
    out = np.zeros((checkpoints.shape[0], m))
    s = np.zeros(m)
    comp = np.zeros(m)
    c = 0
    for step in range(checkpoints[checkpoints.shape[0] - 1]):
        for k in range(m):
            y = points[step, k] - comp[k]
            t = s[k] + y
            comp[k] = (t - s[k]) - y
            s[k] = t
        if step + 1 == checkpoints[c]:
            tot = 0.0
            for k in range(m):
                tot += s[k]
            for k in range(m):
                out[c, k] = s[k] / tot
            c += 1
    return out


@numba.njit(cache=True)
def log_final(logw, lx0, n):
    """Log-state after ``n`` steps, without storing the orbit."""
    lx = lx0.copy()
    nxt = np.empty(lx.shape[0])
    for _ in range(n):
        _log_step(logw, lx, nxt)
        lx, nxt = nxt, lx
    return lx
