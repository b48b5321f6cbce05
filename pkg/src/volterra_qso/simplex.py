"""Points, vertices and faces of the simplex S^{m-1}.

Points are plain float64 numpy arrays. Genotype labels exposed to callers are
1-based (genotype ``1`` is coordinate ``x[0]``), matching the usual notation
M_1, ..., M_m and F_1, ..., F_m.
"""

from __future__ import annotations

from typing import Iterable, Union

import numpy as np

SUM_TOL = 1e-12

FaceId = Union[int, Iterable[int]]


class SimplexError(ValueError):
    pass


def make_point(coords, tol: float = SUM_TOL) -> np.ndarray:
    """Validate ``coords`` as a point of the simplex and return a float64 copy.

    Coordinates must be non-negative and sum to one within ``tol``. The
    returned array is renormalized by its sum, so boundary zeros are kept
    exactly.
    """
    x = np.array(coords, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] < 2:
        raise SimplexError(f"need a 1-d vector with m >= 2 coordinates, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise SimplexError("non-finite coordinate")
    if np.any(x < 0):
        raise SimplexError(f"negative coordinate: {x.min()!r}")
    total = x.sum()
    if abs(total - 1.0) > tol:
        raise SimplexError(f"coordinates sum to {total!r}, not 1")
    return x / total


def is_point(x, tol: float = SUM_TOL) -> bool:
    x = np.asarray(x, dtype=np.float64)
    return bool(
        x.ndim == 1
        and x.shape[0] >= 2
        and np.all(x >= -tol)
        and abs(x.sum() - 1.0) <= tol
    )


def vertex(i: int, m: int) -> np.ndarray:
    """The vertex M_i of S^{m-1}, i in 1..m."""
    if m < 2:
        raise SimplexError(f"m must be >= 2, got {m}")
    if not 1 <= i <= m:
        raise SimplexError(f"vertex index {i} out of range 1..{m}")
    x = np.zeros(m)
    x[i - 1] = 1.0
    return x


def barycenter(m: int) -> np.ndarray:
    return np.full(m, 1.0 / m)


def sample_interior(m: int, seed=None) -> np.ndarray:
    """Uniform (flat Dirichlet) point with every coordinate strictly positive.

    ``seed`` is anything accepted by :func:`numpy.random.default_rng` (PCG64),
    so the draw is reproducible across platforms.
    """
    if m < 2:
        raise SimplexError(f"m must be >= 2, got {m}")
    rng = np.random.default_rng(seed)
    while True:
        x = rng.dirichlet(np.ones(m))
        if np.all(x > 0):
            return x / x.sum()


def sample_interior_batch(m: int, n: int, seed=None) -> np.ndarray:
    """``n`` independent interior points as rows of an (n, m) array."""
    rng = np.random.default_rng(seed)
    out = np.empty((n, m))
    for r in range(n):
        x = rng.dirichlet(np.ones(m))
        while not np.all(x > 0):
            x = rng.dirichlet(np.ones(m))
        out[r] = x / x.sum()
    return out


def face_indices(face: FaceId, m: int | None = None) -> frozenset[int]:
    """Normalize a face argument to the set of zeroed genotypes.

    ``3`` means F_3; ``{1, 2}`` means F_1 ∩ F_2 (e.g. the segment where
    x_1 = x_2 = 0).
    """
    idx = frozenset([face]) if isinstance(face, (int, np.integer)) else frozenset(int(i) for i in face)
    if not idx:
        raise SimplexError("empty face specification")
    if m is not None and not all(1 <= i <= m for i in idx):
        raise SimplexError(f"face {sorted(idx)} out of range 1..{m}")
    return idx


def on_face(x, face: FaceId, tol: float = 0.0) -> bool:
    """True iff x_i <= tol for every zeroed index i of ``face``."""
    x = np.asarray(x)
    idx = face_indices(face, x.shape[0])
    return all(x[i - 1] <= tol for i in idx)


def support(x, tol: float = 0.0) -> frozenset[int]:
    """1-based genotypes with x_i > tol."""
    return frozenset(int(i) + 1 for i in np.flatnonzero(np.asarray(x) > tol))


def linf(x, y) -> float:
    return float(np.max(np.abs(np.asarray(x) - np.asarray(y))))


def merge_coordinates(x, groups: Iterable[Iterable[int]]) -> np.ndarray:
    """Sum coordinates over each group of 1-based genotypes.

    ``merge_coordinates(x, [[1], [2, 3], [4]])`` gives (x1, x2 + x3, x4).
    """
    x = np.asarray(x)
    return np.array([sum(x[i - 1] for i in g) for g in groups])
