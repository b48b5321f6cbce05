"""General quadratic stochastic operators.

A QSO on S^{m-1} is given by heredity coefficients p[i, j, k] >= 0 with
p[i, j, k] == p[j, i, k] and sum_k p[i, j, k] == 1, acting as

    (V x)_k = sum_{i, j} p[i, j, k] x_i x_j.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations as _itperms
from typing import Sequence

import numpy as np

from .simplex import SUM_TOL


class InvalidCoefficients(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


def _pair_index(m: int) -> np.ndarray:
    """(m, m) array mapping an unordered pair to its row in compressed storage."""
    idx = np.empty((m, m), dtype=np.intp)
    r = 0
    for i in range(m):
        for j in range(i, m):
            idx[i, j] = idx[j, i] = r
            r += 1
    return idx


class QsoCoefficients:
    """Immutable heredity coefficients, stored once per unordered pair (i <= j).

    ``rows[r, k]`` holds p_{ij,k} for the r-th pair in the order
    (0,0), (0,1), ..., (0,m-1), (1,1), ...; symmetry (p_{ij,k} = p_{ji,k}) is
    therefore structural. Non-negativity and row sums are checked here, once.
    """

    __slots__ = ("m", "rows", "_pairs", "_tensor")

    def __init__(self, m: int, rows, tol: float = SUM_TOL):
        rows = np.array(rows, dtype=np.float64)
        if m < 2:
            raise InvalidCoefficients(f"m must be >= 2, got {m}")
        if rows.shape != (m * (m + 1) // 2, m):
            raise InvalidCoefficients(f"expected shape {(m * (m + 1) // 2, m)}, got {rows.shape}")
        pairs = [(i, j) for i in range(m) for j in range(i, m)]
        for r, (i, j) in enumerate(pairs):
            if np.any(rows[r] < 0) or not np.all(np.isfinite(rows[r])):
                raise InvalidCoefficients(f"pair ({i + 1},{j + 1}): negative or non-finite coefficient")
            s = rows[r].sum()
            if abs(s - 1.0) > tol:
                raise InvalidCoefficients(f"pair ({i + 1},{j + 1}): coefficients sum to {s!r}")
        rows.flags.writeable = False
        self.m = m
        self.rows = rows
        self._pairs = _pair_index(m)
        t = rows[self._pairs]
        t.flags.writeable = False
        self._tensor = t

    @classmethod
    def from_tensor(cls, p, tol: float = SUM_TOL) -> "QsoCoefficients":
        p = np.asarray(p, dtype=np.float64)
        m = p.shape[0]
        if p.shape != (m, m, m):
            raise InvalidCoefficients(f"tensor must be (m, m, m), got {p.shape}")
        for i in range(m):
            for j in range(i + 1, m):
                if np.max(np.abs(p[i, j] - p[j, i])) > tol:
                    raise InvalidCoefficients(f"pair ({i + 1},{j + 1}): p_ij,k != p_ji,k")
        rows = [p[i, j] for i in range(m) for j in range(i, m)]
        return cls(m, rows, tol=tol)

    @property
    def tensor(self) -> np.ndarray:
        """Full symmetric (m, m, m) view; ``tensor[i, j, k]`` is p_{ij,k}."""
        return self._tensor

    def p(self, i: int, j: int, k: int) -> float:
        """p_{ij,k} with 1-based genotype labels."""
        return float(self._tensor[i - 1, j - 1, k - 1])

    def __eq__(self, other):
        if not isinstance(other, QsoCoefficients):
            return NotImplemented
        return self.m == other.m and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash((self.m, self.rows.tobytes()))

    def __repr__(self):
        return f"QsoCoefficients(m={self.m})"

    def to_dict(self) -> dict:
        entries = []
        for i in range(self.m):
            for j in range(i, self.m):
                for k in range(self.m):
                    v = self._tensor[i, j, k]
                    if v != 0:
                        entries.append({"i": i + 1, "j": j + 1, "k": k + 1, "v": float(v)})
        return {"m": self.m, "p": entries}

    @classmethod
    def from_dict(cls, d: dict) -> "QsoCoefficients":
        """Load ``{"m": int, "p": [{"i", "j", "k", "v"}, ...]}``; omitted entries are 0."""
        try:
            m = int(d["m"])
            entries = d.get("p", [])
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidCoefficients(f"malformed coefficient table: {exc}") from None
        pidx = _pair_index(m)
        rows = np.zeros((m * (m + 1) // 2, m))
        seen = {}
        for e in entries:
            i, j, k, v = int(e["i"]), int(e["j"]), int(e["k"]), float(e.get("v", 0.0))
            if not (1 <= i <= m and 1 <= j <= m and 1 <= k <= m):
                raise InvalidCoefficients(f"pair ({i},{j}): index out of range 1..{m}")
            key = (min(i, j), max(i, j), k)
            if key in seen and seen[key] != v:
                raise InvalidCoefficients(f"pair ({i},{j}): conflicting values for k={k}")
            seen[key] = v
            rows[pidx[i - 1, j - 1], k - 1] = v
        return cls(m, rows)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "QsoCoefficients":
        return cls.from_dict(json.loads(text))


def apply(V: QsoCoefficients, x) -> np.ndarray:
    """One generation: (V x)_k = sum_ij p_ij,k x_i x_j, renormalized to sum 1."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (V.m,):
        raise DimensionMismatch(f"operator has m={V.m}, point has shape {x.shape}")
    y = np.einsum("ijk,i,j->k", V.tensor, x, x)
    return y / y.sum()


@dataclass(frozen=True)
class Permutation:
    """A bijection of {1..m}; ``image[k-1]`` is pi(k)."""

    image: tuple[int, ...]

    def __post_init__(self):
        img = tuple(int(v) for v in self.image)
        if sorted(img) != list(range(1, len(img) + 1)):
            raise ValueError(f"not a permutation of 1..{len(img)}: {img}")
        object.__setattr__(self, "image", img)

    @classmethod
    def identity(cls, m: int) -> "Permutation":
        return cls(tuple(range(1, m + 1)))

    @classmethod
    def transposition(cls, m: int, a: int, b: int) -> "Permutation":
        img = list(range(1, m + 1))
        img[a - 1], img[b - 1] = b, a
        return cls(tuple(img))

    @property
    def m(self) -> int:
        return len(self.image)

    def __call__(self, k: int) -> int:
        return self.image[k - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.m
        for k, v in enumerate(self.image, start=1):
            inv[v - 1] = k
        return Permutation(tuple(inv))

    def then(self, other: "Permutation") -> "Permutation":
        """k -> other(self(k))."""
        return Permutation(tuple(other(v) for v in self.image))

    def as_index(self) -> np.ndarray:
        """0-based numpy index array of the images."""
        return np.array(self.image, dtype=np.intp) - 1


def all_permutations(m: int):
    for img in _itperms(range(1, m + 1)):
        yield Permutation(img)


def apply_permutation(pi: Permutation, x) -> np.ndarray:
    """T_pi(x) = (x_{pi(1)}, ..., x_{pi(m)})."""
    x = np.asarray(x)
    if x.shape != (pi.m,):
        raise DimensionMismatch(f"permutation has m={pi.m}, point has shape {x.shape}")
    return x[pi.as_index()]


def conjugate(V: QsoCoefficients, pi: Permutation) -> QsoCoefficients:
    """The operator W = T_pi^{-1} V T_pi.

    Writing s = pi^{-1}, W has coefficients p^W_{ab,c} = p_{s(a) s(b), s(c)}.
    """
    if pi.m != V.m:
        raise DimensionMismatch(f"operator has m={V.m}, permutation has m={pi.m}")
    s = pi.inverse().as_index()
    return QsoCoefficients.from_tensor(V.tensor[np.ix_(s, s, s)])


def is_volterra(V: QsoCoefficients, tol: float = SUM_TOL) -> bool:
    """p_ij,k == 0 whenever k is not a parent."""
    return not _non_volterra_entries(V, tol)


def _non_volterra_entries(V: QsoCoefficients, tol: float) -> list[tuple[int, int, int]]:
    bad = []
    t = V.tensor
    for i in range(V.m):
        for j in range(i, V.m):
            for k in range(V.m):
                if k != i and k != j and t[i, j, k] > tol:
                    bad.append((i + 1, j + 1, k + 1))
    return bad


def random_qso(m: int, rng: np.random.Generator) -> QsoCoefficients:
    rows = rng.dirichlet(np.ones(m), size=m * (m + 1) // 2)
    rows /= rows.sum(axis=1, keepdims=True)
    return QsoCoefficients(m, rows)
