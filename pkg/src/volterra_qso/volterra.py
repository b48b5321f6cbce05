"""Volterra operators and their extremal (tournament) subclass.

A Volterra QSO never produces a genotype that is not one of the parents, and
is equivalently described by a skew-symmetric matrix ``a`` with |a_ij| <= 1:

    (V x)_k = x_k (1 + sum_i a_ki x_i),   a_ki = 2 p_{ik,k} - 1.

Extremal operators have every mixed coefficient equal to 0 or 1, so ``a`` is
a +-1 matrix and the operator is a tournament on the genotypes. They are
encoded by one bit per pair i < j (lexicographic pair order); the bit is set
when genotype i dominates j, i.e. p_{ij,i} = 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterator, Sequence

import numpy as np

from .qso import (
    DimensionMismatch,
    Permutation,
    QsoCoefficients,
    _non_volterra_entries,
)
from .simplex import SUM_TOL

MAX_ENUM_M = 7

# Greek parameter names of the m = 2, 3, 4 families, in pair order.
GREEK = {
    2: ("alpha",),
    3: ("alpha", "beta", "gamma"),
    4: ("alpha", "beta", "gamma", "delta", "epsilon", "lambda"),
}


class NotVolterra(ValueError):
    pass


class InvalidMatrix(ValueError):
    pass


class DimensionTooLarge(ValueError):
    pass


def pairs(m: int) -> list[tuple[int, int]]:
    """Pairs (i, j), 1 <= i < j <= m, in canonical (lexicographic) order."""
    return [(i, j) for i in range(1, m + 1) for j in range(i + 1, m + 1)]


class VolterraMatrix:
    """Skew-symmetric matrix with entries in [-1, 1]; immutable."""

    __slots__ = ("m", "a", "weights")

    def __init__(self, a, tol: float = SUM_TOL):
        a = np.array(a, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 2:
            raise InvalidMatrix(f"need a square matrix with m >= 2, got shape {a.shape}")
        if np.max(np.abs(a + a.T)) > tol:
            raise InvalidMatrix("matrix is not skew-symmetric")
        if np.max(np.abs(a)) > 1 + tol:
            raise InvalidMatrix("entries must satisfy |a_ij| <= 1")
        a = np.clip(0.5 * (a - a.T), -1.0, 1.0)
        a.flags.writeable = False
        self.m = a.shape[0]
        self.a = a
        # (V x)_k = x_k * sum_i w_ki x_i on the simplex; every w_ki >= 0, so
        # the factor is computed without cancellation.
        w = 1.0 + a
        w.flags.writeable = False
        self.weights = w

    def __eq__(self, other):
        if not isinstance(other, VolterraMatrix):
            return NotImplemented
        return np.array_equal(self.a, other.a)

    def __hash__(self):
        return hash(self.a.tobytes())

    def __repr__(self):
        return f"VolterraMatrix({self.a.tolist()})"


@dataclass(frozen=True)
class ExtremalVolterra:
    """Extremal Volterra operator; ``bits`` follows :func:`pairs` order."""

    m: int
    bits: tuple[bool, ...]

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"m must be >= 2, got {self.m}")
        bits = tuple(bool(b) for b in self.bits)
        if len(bits) != self.m * (self.m - 1) // 2:
            raise ValueError(f"m={self.m} needs {self.m * (self.m - 1) // 2} bits, got {len(bits)}")
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bitstring(cls, s: str, m: int | None = None) -> "ExtremalVolterra":
        s = s.strip()
        if not s or set(s) - {"0", "1"}:
            raise ValueError(f"bit string must contain only 0/1, got {s!r}")
        if m is None:
            m = _m_from_pair_count(len(s))
        return cls(m, tuple(c == "1" for c in s))

    @classmethod
    def from_params(cls, params: Sequence[int], m: int | None = None) -> "ExtremalVolterra":
        """From a Greek tuple such as (alpha, beta, gamma) = (1, 0, 1)."""
        vals = [int(v) for v in params]
        if any(v not in (0, 1) for v in vals):
            raise ValueError(f"parameters must be 0 or 1, got {vals}")
        if m is None:
            m = _m_from_pair_count(len(vals))
        return cls(m, tuple(v == 1 for v in vals))

    @classmethod
    def from_dominance(cls, m: int, wins) -> "ExtremalVolterra":
        """From a set of 1-based (winner, loser) pairs covering every pair once."""
        wins = set(wins)
        bits = []
        for i, j in pairs(m):
            if (i, j) in wins and (j, i) not in wins:
                bits.append(True)
            elif (j, i) in wins and (i, j) not in wins:
                bits.append(False)
            else:
                raise ValueError(f"pair ({i},{j}) must appear in exactly one direction")
        return cls(m, tuple(bits))

    @property
    def bitstring(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def params(self) -> dict[str, int]:
        """Greek-named 0/1 parameters (m <= 4 only)."""
        if self.m not in GREEK:
            raise ValueError(f"no Greek parameterization for m={self.m}")
        return dict(zip(GREEK[self.m], (int(b) for b in self.bits)))

    def dominates(self, i: int, j: int) -> bool:
        """True iff genotype i dominates j (p_{ij,i} = 1)."""
        if i == j:
            raise ValueError("a genotype does not dominate itself")
        if i < j:
            return self.bits[_pair_pos(self.m, i, j)]
        return not self.bits[_pair_pos(self.m, j, i)]

    @property
    def matrix(self) -> VolterraMatrix:
        return extremal_to_matrix(self)

    def __str__(self):
        return f"{self.m}:{self.bitstring}"


def _m_from_pair_count(n: int) -> int:
    m = 2
    while m * (m - 1) // 2 < n:
        m += 1
    if m * (m - 1) // 2 != n:
        raise ValueError(f"{n} is not a valid pair count m(m-1)/2")
    return m


def _pair_pos(m: int, i: int, j: int) -> int:
    # position of (i, j), i < j, 1-based labels
    return (i - 1) * m - (i - 1) * i // 2 + (j - i - 1)


def volterra_from_qso(V: QsoCoefficients, tol: float = SUM_TOL) -> VolterraMatrix:
    bad = _non_volterra_entries(V, tol)
    if bad:
        i, j, k = bad[0]
        raise NotVolterra(f"p_{{{i}{j},{k}}} = {V.p(i, j, k)!r} > 0 with k not a parent")
    t = V.tensor
    a = np.zeros((V.m, V.m))
    for k in range(V.m):
        for i in range(V.m):
            if i != k:
                a[k, i] = 2.0 * t[i, k, k] - 1.0
    return VolterraMatrix(a, tol=2 * tol + 4 * np.finfo(float).eps)


def qso_from_volterra(A: VolterraMatrix) -> QsoCoefficients:
    if not isinstance(A, VolterraMatrix):
        A = VolterraMatrix(A)
    m = A.m
    p = np.zeros((m, m, m))
    for k in range(m):
        p[k, k, k] = 1.0
        for i in range(m):
            if i != k:
                p[i, k, k] = p[k, i, k] = (1.0 + A.a[k, i]) / 2.0
    return QsoCoefficients.from_tensor(p)


def apply_volterra(A: VolterraMatrix | ExtremalVolterra, x) -> np.ndarray:
    """x'_k = x_k (1 + sum_i a_ki x_i), renormalized.

    Evaluated as x_k * sum_i (1 + a_ki) x_i, which is the same on the simplex
    but involves no subtraction; for extremal operators the weights are the
    exact integers 0, 1, 2.
    """
    if isinstance(A, ExtremalVolterra):
        A = extremal_to_matrix(A)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (A.m,):
        raise DimensionMismatch(f"operator has m={A.m}, point has shape {x.shape}")
    y = x * (A.weights @ x)
    return y / y.sum()


_MATRIX_CACHE: dict[ExtremalVolterra, VolterraMatrix] = {}


def extremal_to_matrix(E: ExtremalVolterra) -> VolterraMatrix:
    A = _MATRIX_CACHE.get(E)
    if A is None:
        a = np.zeros((E.m, E.m))
        for (i, j), b in zip(pairs(E.m), E.bits):
            s = 1.0 if b else -1.0
            a[i - 1, j - 1] = s
            a[j - 1, i - 1] = -s
        A = VolterraMatrix(a)
        if len(_MATRIX_CACHE) < 1 << 16:
            _MATRIX_CACHE[E] = A
    return A


def extremal_from_matrix(A: VolterraMatrix) -> ExtremalVolterra:
    a = A.a
    off = a[~np.eye(A.m, dtype=bool)]
    if not np.all(np.abs(off) == 1.0):
        raise InvalidMatrix("not extremal: off-diagonal entries must be +-1")
    return ExtremalVolterra(A.m, tuple(a[i - 1, j - 1] > 0 for i, j in pairs(A.m)))


def enumerate_extremal(m: int) -> Iterator[ExtremalVolterra]:
    """All 2^(m(m-1)/2) extremal operators in lexicographic bit-string order."""
    if m < 2:
        raise ValueError(f"m must be >= 2, got {m}")
    if m > MAX_ENUM_M:
        raise DimensionTooLarge(f"m={m} exceeds MAX_ENUM_M={MAX_ENUM_M}")
    n = m * (m - 1) // 2
    for bits in product((False, True), repeat=n):
        yield ExtremalVolterra(m, bits)


def conjugate_matrix(A: VolterraMatrix, pi: Permutation) -> VolterraMatrix:
    """Matrix of T_pi^{-1} V T_pi: entry (a, b) is a_{s(a) s(b)}, s = pi^{-1}."""
    if pi.m != A.m:
        raise DimensionMismatch(f"operator has m={A.m}, permutation has m={pi.m}")
    s = pi.inverse().as_index()
    return VolterraMatrix(A.a[np.ix_(s, s)])


def conjugate_extremal(E: ExtremalVolterra, pi: Permutation) -> ExtremalVolterra:
    """Relabel genotype v as pi(v)."""
    if pi.m != E.m:
        raise DimensionMismatch(f"operator has m={E.m}, permutation has m={pi.m}")
    bits = []
    s = pi.inverse()
    for i, j in pairs(E.m):
        bits.append(E.dominates(s(i), s(j)))
    return ExtremalVolterra(E.m, tuple(bits))


def random_volterra(m: int, rng: np.random.Generator) -> VolterraMatrix:
    a = np.triu(rng.uniform(-1.0, 1.0, size=(m, m)), 1)
    return VolterraMatrix(a - a.T)


def random_extremal(m: int, rng: np.random.Generator) -> ExtremalVolterra:
    n = m * (m - 1) // 2
    return ExtremalVolterra(m, tuple(bool(b) for b in rng.integers(0, 2, size=n)))
