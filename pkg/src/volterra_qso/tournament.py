"""Tournaments induced by extremal Volterra operators.

``beats[i, j]`` (0-based) is True when genotype i+1 dominates genotype j+1.
Sources and sinks are taken with edges pointing from the dominated genotype
to the dominating one, i.e. along the direction in which frequency flows
under the operator: a *sink* dominates every other genotype (its vertex
attracts), a *source* is dominated by every other genotype (its coordinate
dies out and F_i is invariant).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations, permutations
from typing import Iterable, Sequence

import numpy as np

from .qso import Permutation
from .volterra import MAX_ENUM_M, DimensionTooLarge, ExtremalVolterra, pairs


class Tournament:
    __slots__ = ("m", "beats")

    def __init__(self, beats):
        b = np.array(beats, dtype=bool)
        m = b.shape[0]
        if b.shape != (m, m) or m < 2:
            raise ValueError(f"need a square relation with m >= 2, got shape {b.shape}")
        if np.any(np.diag(b)):
            raise ValueError("self-loop in tournament")
        off = ~np.eye(m, dtype=bool)
        if not np.all((b ^ b.T)[off]):
            raise ValueError("every pair must be joined by exactly one directed edge")
        b.flags.writeable = False
        self.m = m
        self.beats = b

    def dominates(self, i: int, j: int) -> bool:
        return bool(self.beats[i - 1, j - 1])

    def scores(self) -> np.ndarray:
        """Number of genotypes each genotype dominates."""
        return self.beats.sum(axis=1)

    def to_extremal(self) -> ExtremalVolterra:
        return ExtremalVolterra(self.m, tuple(bool(self.beats[i - 1, j - 1]) for i, j in pairs(self.m)))

    @property
    def bitstring(self) -> str:
        return self.to_extremal().bitstring

    def relabel(self, pi: Permutation) -> "Tournament":
        """Tournament of T_pi^{-1} V T_pi: genotype v is renamed pi(v)."""
        s = pi.inverse().as_index()
        return Tournament(self.beats[np.ix_(s, s)])

    def __eq__(self, other):
        if not isinstance(other, Tournament):
            return NotImplemented
        return np.array_equal(self.beats, other.beats)

    def __hash__(self):
        return hash(self.beats.tobytes())

    def __repr__(self):
        return f"Tournament(m={self.m}, bits={self.bitstring})"


def tournament_from_extremal(E: ExtremalVolterra) -> Tournament:
    b = np.zeros((E.m, E.m), dtype=bool)
    for (i, j), bit in zip(pairs(E.m), E.bits):
        if bit:
            b[i - 1, j - 1] = True
        else:
            b[j - 1, i - 1] = True
    return Tournament(b)


def transitive_tournament(order: Sequence[int]) -> Tournament:
    """Linear order, strongest genotype first."""
    m = len(order)
    b = np.zeros((m, m), dtype=bool)
    for a in range(m):
        for c in range(a + 1, m):
            b[order[a] - 1, order[c] - 1] = True
    return Tournament(b)


def reachability(T: Tournament) -> np.ndarray:
    """Reflexive-transitive closure of the dominance relation."""
    r = T.beats | np.eye(T.m, dtype=bool)
    for k in range(T.m):
        r = r | (r[:, k : k + 1] & r[k : k + 1, :])
    return r


def is_strongly_connected(T: Tournament) -> bool:
    return bool(np.all(reachability(T)))


def strong_components(T: Tournament) -> list[list[int]]:
    """Strong components as sorted 1-based lists, strongest component first.

    The condensation of a tournament is itself a linear order.
    """
    r = reachability(T)
    mutual = r & r.T
    seen: set[int] = set()
    comps = []
    for v in range(T.m):
        if v in seen:
            continue
        comp = [int(u) for u in np.flatnonzero(mutual[v])]
        seen.update(comp)
        comps.append(comp)
    # a component reaching more vertices sits higher in the order
    comps.sort(key=lambda c: -int(r[c[0]].sum()))
    return [[u + 1 for u in c] for c in comps]


def has_hamiltonian_cycle(T: Tournament, method: str = "strong") -> bool:
    """Directed cycle through every genotype exactly once.

    ``method="strong"`` uses the tournament criterion (Hamiltonian iff
    strongly connected, for m >= 3); ``method="brute"`` searches all
    (m-1)! cyclic orders and is limited to m <= 8.
    """
    if method == "strong":
        return T.m >= 3 and is_strongly_connected(T)
    if method == "brute":
        if T.m > 8:
            raise DimensionTooLarge(f"brute-force Hamiltonian search limited to m <= 8, got {T.m}")
        b = T.beats
        for rest in permutations(range(1, T.m)):
            cyc = (0,) + rest
            if all(b[cyc[k], cyc[(k + 1) % T.m]] for k in range(T.m)):
                return True
        return False
    raise ValueError(f"unknown method {method!r}")


def sources_and_sinks(T: Tournament) -> tuple[set[int], set[int]]:
    """(sources, sinks) as sets of 1-based genotypes.

    Source: dominated by every other genotype. Sink: dominates every other.
    """
    s = T.scores()
    sources = {int(v) + 1 for v in np.flatnonzero(s == 0)}
    sinks = {int(v) + 1 for v in np.flatnonzero(s == T.m - 1)}
    return sources, sinks


def has_three_cycle(T: Tournament) -> bool:
    b = T.beats
    for i, j, k in combinations(range(T.m), 3):
        if (b[i, j] and b[j, k] and b[k, i]) or (b[j, i] and b[k, j] and b[i, k]):
            return True
    return False


def has_any_cycle(T: Tournament) -> bool:
    """A tournament is acyclic iff its score sequence is 0, 1, ..., m-1."""
    return sorted(T.scores().tolist()) != list(range(T.m))


@dataclass(frozen=True, order=True)
class EquivalenceClassId:
    canonical: str
    size: int


@lru_cache(maxsize=None)
def _perm_table(m: int) -> np.ndarray:
    return np.array(list(permutations(range(m))), dtype=np.intp)


@lru_cache(maxsize=None)
def _pair_arrays(m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    ps = pairs(m)
    rows = np.array([i - 1 for i, _ in ps], dtype=np.intp)
    cols = np.array([j - 1 for _, j in ps], dtype=np.intp)
    weights = 1 << np.arange(len(ps) - 1, -1, -1, dtype=np.int64)
    return rows, cols, weights


def canonical_form(T: Tournament) -> EquivalenceClassId:
    """Smallest bit string over all m! relabelings, plus the orbit size."""
    if T.m > MAX_ENUM_M:
        raise DimensionTooLarge(f"m={T.m} exceeds MAX_ENUM_M={MAX_ENUM_M}")
    S = _perm_table(T.m)
    rows, cols, weights = _pair_arrays(T.m)
    # relabeled[p, a, b] = beats[s(a), s(b)] for every permutation s
    bits = T.beats[S[:, rows], S[:, cols]]
    codes = bits.astype(np.int64) @ weights
    uniq = np.unique(codes)
    n = len(rows)
    return EquivalenceClassId(format(int(uniq[0]), f"0{n}b") if n else "", int(uniq.size))


def partition_into_classes(ts: Iterable[Tournament]) -> dict[EquivalenceClassId, list[Tournament]]:
    """Group tournaments by canonical form; keys are sorted by canonical string."""
    groups: dict[EquivalenceClassId, list[Tournament]] = {}
    m = None
    for t in ts:
        if m is None:
            m = t.m
        elif t.m != m:
            raise ValueError(f"mixed dimensions {m} and {t.m}")
        groups.setdefault(canonical_form(t), []).append(t)
    return dict(sorted(groups.items()))


def cycle_structure(T: Tournament) -> str:
    """Human-readable structure label.

    One of ``hamiltonian``, ``acyclic``, ``sink+<k>-cycle``,
    ``source+<k>-cycle`` (k = m-1), or the strong-component sizes from the
    strongest down, e.g. ``components:1,3,1``.
    """
    comps = strong_components(T)
    sizes = [len(c) for c in comps]
    if len(comps) == 1 and T.m >= 3:
        return "hamiltonian"
    if all(s == 1 for s in sizes):
        return "acyclic"
    if sizes == [1, T.m - 1]:
        return f"sink+{T.m - 1}-cycle"
    if sizes == [T.m - 1, 1]:
        return f"source+{T.m - 1}-cycle"
    return "components:" + ",".join(map(str, sizes))


def class_report(cid: EquivalenceClassId, members: Sequence[Tournament]) -> dict:
    rep = tournament_from_extremal(ExtremalVolterra.from_bitstring(cid.canonical, members[0].m))
    sources, sinks = sources_and_sinks(rep)
    return {
        "class_id": cid.canonical,
        "size": len(members),
        "orbit_size": cid.size,
        "representative_bits": rep.bitstring,
        "has_hamiltonian": has_hamiltonian_cycle(rep),
        "sources": sorted(sources),
        "sinks": sorted(sinks),
        "cycle_structure": cycle_structure(rep),
        "members": [t.bitstring for t in members],
    }
