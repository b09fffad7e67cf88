"""Exhaustive-enumeration ground truth for tiny instances.

Expectations are computed by summing ``functional(realization) * weight``
over every keep/drop assignment of the subdivision tree, with weight
``p^kept (1-p)^dropped`` over the decided nodes; subtrees of dropped nodes
are never expanded (their outcome weights marginalize to one exactly).
All arithmetic is exact and every returned expectation is a
:class:`fractions.Fraction`; pass ``p`` as a Fraction.

The enumeration is organized for reuse: the tree structure (surviving-leaf
patterns with their decision-exponent multiplicities, and the geometric
scores of each pattern) does not depend on ``p`` and is cached; evaluating
an expectation for a concrete ``p = x/y`` then reduces to exact integer
polynomial evaluation over a common denominator ``y^nodes``.

One-dimensional realizations are sorted lists of closed components with
rational endpoints; a degenerate component (a = b) is an isolated point,
which is how intersections of interval unions are scored. Two-dimensional
realizations are boolean lattices scored with the grid-geometry counters.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import product

import numpy as np

from . import geometry

#: Feasible two-dimensional instances (subdivision count, level).
FEASIBLE_2D = ((2, 1), (2, 2), (3, 1))

#: Node budget for one-dimensional trees: sum of M^k for k = 1..n.
MAX_NODES_1D = 21

_FUNCTIONALS_1D = ("V0", "V1", "N", "contains0", "contains1")
_TARGETS_1D = ("K", "D", "KK", "DD")


class InstanceTooLargeError(ValueError):
    """The requested instance lies outside the enumeration envelope."""


def _tree_nodes(M: int, n: int) -> int:
    return sum(M**k for k in range(1, n + 1))


def _weight_numerators(exponents, p: Fraction, emax: int):
    """Exact weights scaled by den(p)^emax: one integer per pattern.

    ``exponents[i]`` lists (kept, dropped, count) triples of pattern i.
    """
    x, y = p.numerator, p.denominator
    xq = y - x
    nums = []
    for triples in exponents:
        total = 0
        for a, b, c in triples:
            total += c * x**a * xq**b * y ** (emax - a - b)
        nums.append(total)
    return nums


# ---------------------------------------------------------------------------
# One dimension
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntervalSet1D:
    """Disjoint sorted closed components of [0, 1] with rational endpoints."""

    components: tuple

    @property
    def v0(self) -> int:
        return len(self.components)

    @property
    def v1(self) -> Fraction:
        return sum((b - a for a, b in self.components), Fraction(0))

    @property
    def isolated_count(self) -> int:
        return sum(1 for a, b in self.components if a == b)

    def contains(self, x) -> bool:
        return any(a <= x <= b for a, b in self.components)

    def intersect(self, other: "IntervalSet1D") -> "IntervalSet1D":
        out = []
        i = j = 0
        a_list, b_list = self.components, other.components
        while i < len(a_list) and j < len(b_list):
            lo = max(a_list[i][0], b_list[j][0])
            hi = min(a_list[i][1], b_list[j][1])
            if lo <= hi:
                out.append((lo, hi))
            if a_list[i][1] < b_list[j][1]:
                i += 1
            else:
                j += 1
        return IntervalSet1D(tuple(out))


def interval_set_from_leaves(mask: int, M: int, n: int) -> IntervalSet1D:
    """Merge the surviving level-n cells encoded in ``mask`` into components."""
    L = M**n
    s = Fraction(1, L)
    comps = []
    i = 0
    while i < L:
        if (mask >> i) & 1:
            j = i
            while j + 1 < L and (mask >> (j + 1)) & 1:
                j += 1
            comps.append((i * s, (j + 1) * s))
            i = j + 1
        else:
            i += 1
    return IntervalSet1D(tuple(comps))


@lru_cache(maxsize=None)
def _leaf_structure(M: int, n: int) -> tuple:
    """p-independent enumeration of K_n: ((mask, ((kept, dropped, count), ...)), ...)."""
    if _tree_nodes(M, n) > MAX_NODES_1D:
        raise InstanceTooLargeError(
            f"1d tree with {_tree_nodes(M, n)} nodes exceeds the budget of {MAX_NODES_1D}"
        )
    if n == 0:
        return ((1, ((0, 0, 1),)),)
    prev = _leaf_structure(M, n - 1)
    prev_bits = M ** (n - 1)
    options = [(0, (0, 1, 1))]  # dropped child: empty pattern, one dropped node
    for mask, triples in prev:
        for a, b, c in triples:
            options.append((mask, (a + 1, b, c)))
    acc: dict[int, dict[tuple, int]] = {}
    for combo in product(options, repeat=M):
        mask = 0
        a = b = 0
        c = 1
        for j, (mj, (aj, bj, cj)) in enumerate(combo):
            mask |= mj << (j * prev_bits)
            a += aj
            b += bj
            c *= cj
        bucket = acc.setdefault(mask, {})
        bucket[(a, b)] = bucket.get((a, b), 0) + c
    return tuple(
        sorted((mask, tuple((a, b, c) for (a, b), c in sorted(e.items())))
               for mask, e in acc.items())
    )


def leaf_distribution(M: int, p, n: int) -> tuple:
    """Exact surviving-leaf distribution of K_n as ((mask, Fraction), ...)."""
    p = Fraction(p)
    emax = _tree_nodes(M, n)
    structure = _leaf_structure(M, n)
    nums = _weight_numerators([e for _, e in structure], p, emax)
    den = p.denominator**emax
    return tuple((mask, Fraction(num, den)) for (mask, _), num in zip(structure, nums))


def _score_set(iv: IntervalSet1D, functional: str) -> Fraction:
    if functional == "V0":
        return Fraction(iv.v0)
    if functional == "V1":
        return iv.v1
    if functional == "N":
        return Fraction(iv.isolated_count)
    if functional == "contains0":
        return Fraction(1 if iv.contains(Fraction(0)) else 0)
    if functional == "contains1":
        return Fraction(1 if iv.contains(Fraction(1)) else 0)
    raise ValueError(f"unknown functional {functional!r}")


@lru_cache(maxsize=None)
def _pair_scores_1d(M: int, n: int, family: str) -> tuple:
    """Score matrices of pairwise intersections for "KK" or "DD".

    Returns (v0, v1_scaled, isolated) as int64 arrays over pattern pairs,
    with v1 scaled by M^n to stay integral.
    """
    structure = _leaf_structure(M, n)
    full = (1 << (M**n)) - 1
    scale = M**n
    sets = []
    for mask, _ in structure:
        key = mask if family == "KK" else mask ^ full
        sets.append(interval_set_from_leaves(key, M, n))
    size = len(sets)
    v0 = np.zeros((size, size), dtype=np.int64)
    v1 = np.zeros((size, size), dtype=np.int64)
    iso = np.zeros((size, size), dtype=np.int64)
    for i, si in enumerate(sets):
        for j in range(i, size):
            iv = si.intersect(sets[j])
            v0[i, j] = v0[j, i] = iv.v0
            v1[i, j] = v1[j, i] = int(iv.v1 * scale)
            iso[i, j] = iso[j, i] = iv.isolated_count
    return v0, v1, iso


def _quadratic_form(weights: list, matrix: np.ndarray) -> int:
    """Exact sum_{ij} w_i w_j m_ij for integer weights, safe fallback included."""
    size = len(weights)
    wmax = max(abs(w) for w in weights)
    mmax = int(np.abs(matrix).max(initial=0))
    if wmax and wmax * mmax * size < 2**62:
        warr = np.asarray(weights, dtype=np.int64)
        inner = matrix @ warr
        return sum(int(w) * int(v) for w, v in zip(weights, inner.tolist()))
    return sum(
        int(weights[i]) * int(weights[j]) * int(matrix[i, j])
        for i in range(size)
        for j in range(size)
    )


def enumerate_1d(M: int, p, n: int, functional: str = "V0", target: str = "K") -> Fraction:
    """Exact expectation of a functional of K_n, D_n, or the intersection
    of two independent copies (targets "KK" and "DD")."""
    if functional not in _FUNCTIONALS_1D:
        raise ValueError(f"functional must be one of {_FUNCTIONALS_1D}, got {functional!r}")
    if target not in _TARGETS_1D:
        raise ValueError(f"target must be one of {_TARGETS_1D}, got {target!r}")
    p = Fraction(p)
    structure = _leaf_structure(M, n)
    emax = _tree_nodes(M, n)
    nums = _weight_numerators([e for _, e in structure], p, emax)
    den = p.denominator**emax
    full = (1 << (M**n)) - 1
    if target in ("K", "D"):
        total = Fraction(0)
        for (mask, _), num in zip(structure, nums):
            if target == "D":
                mask ^= full
            score = _score_set(interval_set_from_leaves(mask, M, n), functional)
            total += Fraction(num, den) * score
        return total
    family = "KK" if target == "KK" else "DD"
    if functional in ("contains0", "contains1"):
        # membership of an endpoint in the intersection factorizes over copies
        single = enumerate_1d(M, p, n, functional, "K" if family == "KK" else "D")
        return single * single
    v0, v1, iso = _pair_scores_1d(M, n, family)
    matrix = {"V0": v0, "V1": v1, "N": iso}[functional]
    total = _quadratic_form(nums, matrix)
    value = Fraction(total, den * den)
    if functional == "V1":
        value /= M**n
    return value


# ---------------------------------------------------------------------------
# Two dimensions
# ---------------------------------------------------------------------------

def _check_2d_budget(M: int, n: int) -> None:
    if (M, n) not in FEASIBLE_2D:
        raise InstanceTooLargeError(
            f"(M, n) = ({M}, {n}) outside the 2d enumeration envelope {FEASIBLE_2D}"
        )


@lru_cache(maxsize=None)
def _block_structure(M: int, n: int) -> tuple:
    """p-independent enumeration of the M^n x M^n occupancy patterns.

    Returns ((packed_pattern, ((kept, dropped, count), ...)), ...) with the
    pattern packed row-major by :func:`numpy.packbits`.
    """
    side = M**n
    if n == 1:
        entries = []
        for bits in product((0, 1), repeat=M * M):
            occ = np.array(bits, dtype=bool).reshape(M, M)
            kept = sum(bits)
            entries.append(
                (np.packbits(occ).tobytes(), ((kept, M * M - kept, 1),))
            )
        return tuple(sorted(entries))
    prev = _block_structure(M, n - 1)
    sub = M ** (n - 1)
    options = [(None, (0, 1, 1))]
    for key, triples in prev:
        blk = np.unpackbits(np.frombuffer(key, np.uint8))[: sub * sub]
        blk = blk.reshape(sub, sub).astype(bool)
        for a, b, c in triples:
            options.append((blk, (a + 1, b, c)))
    acc: dict[bytes, dict[tuple, int]] = {}
    occ = np.zeros((side, side), dtype=bool)
    for combo in product(options, repeat=M * M):
        occ[:] = False
        a = b = 0
        c = 1
        for cell, (blk, (aj, bj, cj)) in enumerate(combo):
            a += aj
            b += bj
            c *= cj
            if blk is not None:
                r, col = divmod(cell, M)
                occ[r * sub : (r + 1) * sub, col * sub : (col + 1) * sub] = blk
        key = np.packbits(occ).tobytes()
        bucket = acc.setdefault(key, {})
        bucket[(a, b)] = bucket.get((a, b), 0) + c
    return tuple(
        sorted((key, tuple((a, b, c) for (a, b), c in sorted(e.items())))
               for key, e in acc.items())
    )


@lru_cache(maxsize=None)
def _pattern_scores_2d(M: int, n: int) -> tuple:
    """Integer scores of every pattern: (v0_F, v1s_F, faces_F, v0_C, v1s_C, faces_C).

    v1s is 2*faces - shared_edges, i.e. V1 scaled by M^n.
    """
    side = M**n
    scores = []
    for key, _ in _block_structure(M, n):
        occ = np.unpackbits(np.frombuffer(key, np.uint8))[: side * side]
        occ = occ.reshape(side, side).astype(bool)
        row = []
        for target_occ in (occ, ~occ):
            mv = geometry.minkowski_of_array(target_occ, 1, d=2)
            row.extend((mv.v0, 2 * mv.faces - mv.edges_shared, mv.faces))
        scores.append(tuple(row))
    return tuple(scores)


def _nodes_2d(M: int, n: int) -> int:
    return sum((M * M) ** k for k in range(1, n + 1))


@lru_cache(maxsize=None)
def _table_2d(M: int, p: Fraction, n: int) -> dict:
    """All six exact expectations {(functional, target): Fraction}."""
    structure = _block_structure(M, n)
    scores = _pattern_scores_2d(M, n)
    emax = _nodes_2d(M, n)
    nums = _weight_numerators([e for _, e in structure], p, emax)
    den = p.denominator**emax
    acc = [0, 0, 0, 0, 0, 0]
    for num, row in zip(nums, scores):
        for i, s in enumerate(row):
            acc[i] += num * s
    side = M**n
    s1 = Fraction(1, side)
    return {
        ("V0", "F"): Fraction(acc[0], den),
        ("V1", "F"): Fraction(acc[1], den) * s1,
        ("V2", "F"): Fraction(acc[2], den) * s1 * s1,
        ("V0", "C"): Fraction(acc[3], den),
        ("V1", "C"): Fraction(acc[4], den) * s1,
        ("V2", "C"): Fraction(acc[5], den) * s1 * s1,
    }


def enumerate_2d(M: int, p, n: int, functional: str = "V0", target: str = "F") -> Fraction:
    """Exact expectation E V_k at level n for the construction set ("F")
    or its closed complement ("C"); feasible instances only."""
    _check_2d_budget(M, n)
    if functional not in ("V0", "V1", "V2"):
        raise ValueError(f"functional must be V0, V1 or V2, got {functional!r}")
    if target not in ("F", "C"):
        raise ValueError(f"target must be 'F' or 'C', got {target!r}")
    return _table_2d(M, Fraction(p), n)[(functional, target)]


# ---------------------------------------------------------------------------
# Per-configuration oracles for the first-level intersection terms
# ---------------------------------------------------------------------------

def enumerate_corner_intersection_2d(M: int, p, n: int, ell: int, k: int, target: str = "F") -> Fraction:
    """Exact E V_k of ell construction sets (or complements) meeting at a
    first-level corner, by enumerating the ell survival chains of length n.

    The intersection is the corner point itself; it belongs to copy j
    exactly when every node of the chain of cells containing the corner
    survives ("C": when at least one node died).
    """
    p = Fraction(p)
    if k >= 1:
        return Fraction(0)
    if ell * n > 24:
        raise InstanceTooLargeError("corner chains too deep to enumerate")
    total = Fraction(0)
    for bits in product((0, 1), repeat=ell * n):
        w = Fraction(1)
        for b in bits:
            w *= p if b else 1 - p
        alive = [all(bits[j * n : (j + 1) * n]) for j in range(ell)]
        present = all(alive) if target == "F" else not any(alive)
        total += w * (1 if present else 0)
    return total


def enumerate_side_intersection_2d(M: int, p, n: int, k: int, target: str = "F") -> Fraction:
    """Exact E V_k of a side pair of first-level cells at level n.

    The two neighbouring copies restrict to their shared segment as two
    independent one-dimensional trees at level n-1, each preceded by one
    extra survival decision ("F": empty on failure; "C": the whole segment
    on failure). V_k scales by M^-k under the embedding of the segment.
    """
    p = Fraction(p)
    if n < 1:
        raise ValueError("side intersections exist for n >= 1")
    dist = leaf_distribution(M, p, n - 1)
    full = (1 << (M ** (n - 1))) - 1
    whole = IntervalSet1D(((Fraction(0), Fraction(1)),))
    empty = IntervalSet1D(())
    hat = []
    for mask, w in dist:
        if target == "C":
            mask ^= full
        hat.append((p * w, interval_set_from_leaves(mask, M, n - 1)))
    hat.append((1 - p, empty if target == "F" else whole))
    total = Fraction(0)
    for w1, s1 in hat:
        for w2, s2 in hat:
            iv = s1.intersect(s2)
            value = Fraction(iv.v0) if k == 0 else iv.v1
            total += w1 * w2 * value
    return total / M**k
