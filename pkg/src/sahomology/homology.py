"""Integer simplicial homology via Smith normal forms of boundary matrices.

Entries are Python ints throughout, so invariant factors never overflow. A
sparse unimodular column reduction (the integer analogue of the standard
persistence reduction) first brings the matrix to column echelon form. If all
pivots are +-1 every invariant factor is 1. Otherwise unit pivots are
eliminated from the echelon form, and what is left (a small block carrying
the torsion) goes through a dense Smith normal form with
minimal-absolute-value pivoting.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.sparse as sp

from .complex import SimplicialComplex

MOD_P = 2 ** 31 - 1


@dataclass(frozen=True)
class HomologySummary:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(self.betti) != len(self.torsion):
            raise ValueError("betti and torsion lengths differ")
        if any(b < 0 for b in self.betti):
            raise ValueError("negative Betti number")
        for factors in self.torsion:
            if any(d <= 1 for d in factors) or any(b % a for a, b in zip(factors, factors[1:])):
                raise ValueError(f"torsion factors {factors} are not a divisibility chain of integers > 1")

    @property
    def euler_characteristic(self) -> int:
        return sum((-1) ** k * b for k, b in enumerate(self.betti))

    def to_json(self) -> dict:
        return {"betti": list(self.betti), "torsion": [list(t) for t in self.torsion]}

    @classmethod
    def from_json(cls, data: dict) -> "HomologySummary":
        return cls(tuple(int(b) for b in data["betti"]), tuple(tuple(int(d) for d in t) for t in data["torsion"]))


def boundary_matrix(C: SimplicialComplex, k: int) -> sp.csc_matrix:
    """Integer matrix of the boundary map C_k -> C_{k-1} in sorted simplex order."""
    if k < 1:
        raise ValueError("k must be >= 1")
    cols = C.simplices[k] if k < len(C.simplices) else ()
    rows = C.simplices[k - 1] if k - 1 < len(C.simplices) else ()
    index = {s: i for i, s in enumerate(rows)}
    r, c, v = [], [], []
    for j, s in enumerate(cols):
        for i in range(k + 1):
            face = s[:i] + s[i + 1:]
            r.append(index[face])
            c.append(j)
            v.append(-1 if i % 2 else 1)
    return sp.csc_matrix((np.array(v, dtype=np.int64), (np.array(r, dtype=np.int64), np.array(c, dtype=np.int64))),
                         shape=(len(rows), len(cols)))


def _columns(M) -> tuple[dict[int, dict[int, int]], tuple[int, int]]:
    if sp.issparse(M):
        M = M.tocsc()
        M.sum_duplicates()
        cols = {}
        for j in range(M.shape[1]):
            lo, hi = M.indptr[j], M.indptr[j + 1]
            col = {int(i): int(x) for i, x in zip(M.indices[lo:hi], M.data[lo:hi]) if x}
            if col:
                cols[j] = col
        return cols, M.shape
    rows = [list(r) for r in (M.tolist() if isinstance(M, np.ndarray) else M)]
    shape = (len(rows), len(rows[0]) if rows else 0)
    cols = {}
    for j in range(shape[1]):
        col = {i: int(rows[i][j]) for i in range(shape[0]) if rows[i][j]}
        if col:
            cols[j] = col
    return cols, shape


def _eliminate_units(cols: dict[int, dict[int, int]]) -> int:
    """Eliminate +-1 pivots in place; returns how many were used. cols keeps the Schur complement."""
    rows: dict[int, set[int]] = defaultdict(set)
    for c, col in cols.items():
        for r in col:
            rows[r].add(c)
    heap = [(len(col), c) for c, col in cols.items()]
    heapq.heapify(heap)
    used = 0
    while heap:
        length, c = heapq.heappop(heap)
        col = cols.get(c)
        if col is None or len(col) != length:
            continue
        if not col:
            del cols[c]
            continue
        pivot = None
        for r, v in col.items():
            if (v == 1 or v == -1) and (pivot is None or len(rows[r]) < len(rows[pivot])):
                pivot = r
        if pivot is None:
            continue
        u = col[pivot]
        for j in list(rows[pivot]):
            if j == c:
                continue
            other = cols[j]
            factor = other[pivot] * u
            for r, v in col.items():
                nv = other.get(r, 0) - factor * v
                if nv:
                    if r not in other:
                        rows[r].add(j)
                    other[r] = nv
                elif r in other:
                    del other[r]
                    rows[r].discard(j)
            heapq.heappush(heap, (len(other), j))
        for r in col:
            rows[r].discard(c)
        del rows[pivot]
        del cols[c]
        used += 1
    for c in [c for c, col in cols.items() if not col]:
        del cols[c]
    return used


def _dense_snf(A: list[list[int]]) -> list[int]:
    """Nonzero diagonal of the Smith normal form (absolute values, divisibility chain)."""
    factors = []
    A = [row[:] for row in A if any(row)]
    while A and A[0]:
        nz = [(abs(x), i, j) for i, row in enumerate(A) for j, x in enumerate(row) if x]
        if not nz:
            break
        _, pi, pj = min(nz)
        A[0], A[pi] = A[pi], A[0]
        for row in A:
            row[0], row[pj] = row[pj], row[0]
        while True:
            p = A[0][0]
            dirty = False
            for i in range(1, len(A)):
                if A[i][0]:
                    q = A[i][0] // p
                    A[i] = [a - q * b for a, b in zip(A[i], A[0])]
                    dirty |= A[i][0] != 0
            for j in range(1, len(A[0])):
                if A[0][j]:
                    q = A[0][j] // p
                    for row in A:
                        row[j] -= q * row[0]
                    dirty |= A[0][j] != 0
            if dirty:
                # a smaller remainder appeared in the pivot row or column: move it to the corner
                cand = [(abs(A[i][0]), i, 0) for i in range(len(A)) if A[i][0]]
                cand += [(abs(A[0][j]), 0, j) for j in range(len(A[0])) if A[0][j]]
                _, pi, pj = min(cand)
                A[0], A[pi] = A[pi], A[0]
                for row in A:
                    row[0], row[pj] = row[pj], row[0]
                continue
            bad = next((i for i in range(1, len(A)) if any(x % p for x in A[i][1:])), None)
            if bad is None:
                break
            A[0] = [a + b for a, b in zip(A[0], A[bad])]
        factors.append(abs(A[0][0]))
        A = [row[1:] for row in A[1:]]
        A = [row for row in A if any(row)]
    return factors


def _chain(factors: list[int]) -> list[int]:
    """Rewrite a diagonal as the equivalent divisibility chain."""
    f = sorted(factors)
    for i in range(len(f)):
        for j in range(i + 1, len(f)):
            g = math.gcd(f[i], f[j])
            f[i], f[j] = g, f[i] // g * f[j]
    return f


def _column_echelon(cols: dict[int, dict[int, int]], skip=frozenset()) -> dict[int, dict[int, int]]:
    """Unimodular column reduction to columns with pairwise distinct lowest rows.

    Columns are reduced left to right against the stored column owning their
    lowest nonzero row; when the owner's entry does not divide, an extended-gcd
    2x2 column operation replaces the owner by a column whose low entry is the
    gcd. Returns the nonzero columns keyed by their low row. Columns in ``skip``
    must be integer combinations of earlier columns; they are dropped.
    """
    owner: dict[int, dict[int, int]] = {}
    for c in sorted(cols):
        if c in skip:
            continue
        col = dict(cols[c])
        while col:
            low = max(col)
            piv = owner.get(low)
            if piv is None:
                owner[low] = col
                break
            a, b = col[low], piv[low]
            if a % b == 0:
                q = a // b
                for r, v in piv.items():
                    nv = col.get(r, 0) - q * v
                    if nv:
                        col[r] = nv
                    else:
                        col.pop(r, None)
                continue
            g, x, y = _xgcd(b, a)
            # [piv, col] -> [x*piv + y*col, (a/g)*piv - (b/g)*col]; determinant -1
            new_piv: dict[int, int] = {}
            new_col: dict[int, int] = {}
            for r in set(piv) | set(col):
                pv, cv = piv.get(r, 0), col.get(r, 0)
                u = x * pv + y * cv
                w = (a // g) * pv - (b // g) * cv
                if u:
                    new_piv[r] = u
                if w:
                    new_col[r] = w
            owner[low] = new_piv
            col = new_col
    return owner


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """(g, x, y) with g = gcd(a, b) > 0 and x a + y b = g."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def _factors_of_echelon(echelon: dict[int, dict[int, int]]) -> list[int]:
    rank = len(echelon)
    if all(abs(col[low]) == 1 for low, col in echelon.items()):
        # a rank-sized minor is triangular with unit diagonal, so every d_i = 1
        return [1] * rank
    cols = {i: dict(col) for i, col in enumerate(echelon.values())}
    units = _eliminate_units(cols)
    rest = []
    if cols:
        rlist = sorted({r for col in cols.values() for r in col})
        rpos = {r: i for i, r in enumerate(rlist)}
        clist = sorted(cols)
        rest = [[0] * len(clist) for _ in rlist]
        for j, c in enumerate(clist):
            for r, v in cols[c].items():
                rest[rpos[r]][j] = v
    return [1] * units + _chain(_dense_snf(rest))


def smith_normal_form(M) -> tuple[int, list[int]]:
    """Rank and invariant factors d_1 | d_2 | ... | d_rank of an integer matrix."""
    cols, _ = _columns(M)
    factors = _factors_of_echelon(_column_echelon(cols))
    return len(factors), factors


def _rank_mod_p_columns(cols: dict[int, dict[int, int]], p: int, skip=frozenset()) -> dict[int, dict[int, int]]:
    pivots: dict[int, dict[int, int]] = {}
    for c in sorted(cols):
        if c in skip:
            continue
        col = {r: v % p for r, v in cols[c].items() if v % p}
        while col:
            low = max(col)
            piv = pivots.get(low)
            if piv is None:
                inv = pow(col[low], -1, p)
                pivots[low] = {r: v * inv % p for r, v in col.items()}
                break
            factor = col[low]
            for r, v in piv.items():
                nv = (col.get(r, 0) - factor * v) % p
                if nv:
                    col[r] = nv
                else:
                    col.pop(r, None)
    return pivots


def rank_mod_p(M, p: int = MOD_P) -> int:
    """Rank over GF(p); equals the rational rank unless p divides an invariant factor."""
    cols, _ = _columns(M)
    return len(_rank_mod_p_columns(cols, p))


def homology_groups(C: SimplicialComplex, max_dim: int, torsion: bool = True) -> HomologySummary:
    """Betti numbers b_0..b_max_dim and torsion of H_k, k <= max_dim.

    The ranks and invariant factors of the boundary map d_{k+1} are read off
    its transpose (the coboundary), reduced for k = 0, 1, ... in turn. A
    k-simplex that is the unit pivot of a reduced coboundary column in degree
    k - 1 indexes a column of the degree-k coboundary that is an integer
    combination of earlier ones, so it is skipped ("clearing"); the transpose
    has the same invariant factors. With torsion=False the ranks are computed
    over GF(2^31 - 1) and the torsion entries are left empty.
    """
    if max_dim < 0:
        raise ValueError("max_dim must be >= 0")
    ranks = [0] * (max_dim + 2)
    tors: list[tuple[int, ...]] = [()] * (max_dim + 1)
    cleared: set[int] = set()
    for k in range(0, max_dim + 1):
        if k + 1 >= len(C.simplices) or not C.simplices[k + 1]:
            break
        cols, _ = _columns(boundary_matrix(C, k + 1).T.tocsc())
        if torsion:
            echelon = _column_echelon(cols, cleared)
            factors = _factors_of_echelon(echelon)
            ranks[k + 1] = len(factors)
            tors[k] = tuple(d for d in factors if d > 1)
            cleared = {low for low, col in echelon.items() if abs(col[low]) == 1}
        else:
            pivots = _rank_mod_p_columns(cols, MOD_P, cleared)
            ranks[k + 1] = len(pivots)
            cleared = set(pivots)
    betti = tuple(C.count(k) - ranks[k] - ranks[k + 1] for k in range(max_dim + 1))
    return HomologySummary(betti, tuple(tors))


def boundary_squared_is_zero(C: SimplicialComplex) -> bool:
    for k in range(1, len(C.simplices) - 1):
        prod = boundary_matrix(C, k) @ boundary_matrix(C, k + 1)
        if prod.count_nonzero():
            return False
    return True


def euler_identity_holds(C: SimplicialComplex, H: HomologySummary) -> bool:
    """Sum (-1)^k b_k equals sum (-1)^k #k-simplices (valid when H covers every dimension of C)."""
    return H.euler_characteristic == C.euler_characteristic()


def boundary_of_simplex(vertices) -> SimplicialComplex:
    """All proper faces of the simplex on the given vertices (a sphere of dimension len - 2)."""
    v = sorted(vertices)
    return SimplicialComplex.from_simplices(combinations(v, len(v) - 1), close=True)
