"""Truncated Cech complexes of point clouds and Boolean combinations of them.

A set sigma of points spans a simplex of the Cech complex at radius eps when
the open eps-balls around its points share a point, i.e. when its minimum
enclosing ball has radius < eps. Vertices are grid indices, so complexes
built on clouds of one grid can be intersected and united exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Mapping

import numpy as np
from scipy.spatial import cKDTree

from .errors import ResourceExceeded
from .formula import And, Formula, LaxAtom, Not, Or, atoms
from .meb import meb_radius_batch
from .sampling import PointCloud

Simplex = tuple[int, ...]


@dataclass(frozen=True, eq=False)
class SimplicialComplex:
    """Simplices grouped by dimension; each simplex is a sorted tuple of vertex ids."""

    simplices: tuple[tuple[Simplex, ...], ...]

    @classmethod
    def from_simplices(cls, simplices: Iterable[Iterable[int]], close: bool = False) -> "SimplicialComplex":
        found: set[Simplex] = set()
        for s in simplices:
            s = tuple(sorted(set(int(v) for v in s)))
            if not s:
                continue
            if close:
                for r in range(1, len(s) + 1):
                    found.update(combinations(s, r))
            else:
                found.add(s)
        if not found:
            return cls(())
        top = max(len(s) for s in found)
        by_dim = [[] for _ in range(top)]
        for s in found:
            by_dim[len(s) - 1].append(s)
        return cls(tuple(tuple(sorted(level)) for level in by_dim))

    @property
    def dimension(self) -> int:
        return len(self.simplices) - 1

    def count(self, k: int) -> int:
        return len(self.simplices[k]) if 0 <= k < len(self.simplices) else 0

    def counts(self) -> list[int]:
        return [len(level) for level in self.simplices]

    def __len__(self) -> int:
        return sum(self.counts())

    def __iter__(self):
        for level in self.simplices:
            yield from level

    def __contains__(self, simplex) -> bool:
        s = tuple(sorted(simplex))
        k = len(s) - 1
        return 0 <= k < len(self.simplices) and s in self._sets[k]

    @property
    def _sets(self) -> list[set]:
        cached = self.__dict__.get("_set_cache")
        if cached is None:
            cached = [set(level) for level in self.simplices]
            self.__dict__["_set_cache"] = cached
        return cached

    def as_set(self) -> set[Simplex]:
        return set(self)

    def __eq__(self, other):
        if not isinstance(other, SimplicialComplex):
            return NotImplemented
        return self.as_set() == other.as_set()

    def __hash__(self):
        return hash(frozenset(self))

    @property
    def vertices(self) -> tuple[int, ...]:
        return tuple(s[0] for s in self.simplices[0]) if self.simplices else ()

    def union(self, other: "SimplicialComplex") -> "SimplicialComplex":
        return SimplicialComplex.from_simplices(self.as_set() | other.as_set())

    def intersection(self, other: "SimplicialComplex") -> "SimplicialComplex":
        return SimplicialComplex.from_simplices(self.as_set() & other.as_set())

    def is_closed(self) -> bool:
        sets = self._sets
        for k in range(1, len(self.simplices)):
            for s in self.simplices[k]:
                for face in combinations(s, k):
                    if face not in sets[k - 1]:
                        return False
        return True

    def euler_characteristic(self) -> int:
        return sum((-1) ** k * c for k, c in enumerate(self.counts()))

    def to_text(self) -> str:
        return "".join(" ".join(map(str, s)) + "\n" for s in self)

    @classmethod
    def from_text(cls, text: str) -> "SimplicialComplex":
        return cls.from_simplices(tuple(int(v) for v in line.split()) for line in text.splitlines() if line.strip())


def proximity_pairs(coords: np.ndarray, eps: float) -> np.ndarray:
    """Index pairs (i < j) at Euclidean distance < 2 eps."""
    if len(coords) < 2:
        return np.zeros((0, 2), dtype=np.int64)
    pairs = cKDTree(coords).query_pairs(2.0 * eps, output_type="ndarray")
    if len(pairs) == 0:
        return pairs.reshape(0, 2)
    d = np.linalg.norm(coords[pairs[:, 0]] - coords[pairs[:, 1]], axis=1)
    pairs = pairs[d < 2.0 * eps]
    return pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]


def _concat_ranges(starts: np.ndarray, counts: np.ndarray) -> np.ndarray:
    """Concatenation of arange(s, s + c) over the pairs, without a Python loop."""
    total = int(counts.sum())
    if total == 0:
        return np.zeros(0, dtype=np.int64)
    offsets = np.repeat(np.cumsum(counts) - counts, counts)
    return np.repeat(starts, counts) + (np.arange(total) - offsets)


def _enumerate(ids: np.ndarray, coords: np.ndarray, eps: float, max_card: int,
               masks: np.ndarray | None = None, accept: Callable[[int], bool] | None = None,
               budget: int | None = None, chunk: int = 250_000) -> SimplicialComplex:
    """Cech simplices with at most max_card vertices, optionally filtered by accept(AND of vertex masks).

    Simplices are grown one vertex at a time: a k-simplex extends by every
    larger-indexed vertex adjacent (distance < 2 eps) to all its vertices, and
    the extension is kept if its enclosing radius is < eps. ``masks`` holds one
    row of uint64 words per vertex; ``accept`` must be antitone along faces (true
    for monotone formulas over cloud memberships), so growing only from kept
    faces loses nothing.
    """
    ids = np.asarray(ids)
    order = np.argsort(ids, kind="stable")
    ids = ids[order]
    coords = np.asarray(coords, dtype=float)[order]
    if masks is not None:
        masks = np.asarray(masks)[order]
        keep = _accept_rows(masks, accept)
        ids, coords, masks = ids[keep], coords[keep], masks[keep]
    npts = len(ids)
    if npts == 0:
        return SimplicialComplex(())
    pairs = proximity_pairs(coords, eps)
    edge_keys = pairs[:, 0].astype(np.int64) * npts + pairs[:, 1]
    indptr = np.zeros(npts + 1, dtype=np.int64)
    np.add.at(indptr, pairs[:, 0] + 1, 1)
    indptr = np.cumsum(indptr)
    nbr = pairs[:, 1].astype(np.int64)

    levels = [np.arange(npts, dtype=np.int64)[:, None]]
    level_masks = masks
    total = npts
    while levels[-1].shape[1] < max_card and len(levels[-1]):
        S = levels[-1]
        found, found_masks = [], []
        for lo in range(0, len(S), chunk):
            block = S[lo:lo + chunk]
            last = block[:, -1]
            counts = indptr[last + 1] - indptr[last]
            rep = np.repeat(np.arange(len(block)), counts)
            j = nbr[_concat_ranges(indptr[last], counts)]
            cand = block[rep]
            ok = np.ones(len(j), dtype=bool)
            for col in range(cand.shape[1] - 1):
                keys = cand[:, col] * npts + j
                pos = np.searchsorted(edge_keys, keys)
                pos[pos == len(edge_keys)] = 0
                ok &= edge_keys[pos] == keys if len(edge_keys) else False
            cand, j, rep = cand[ok], j[ok], rep[ok]
            new_masks = None
            if masks is not None:
                new_masks = level_masks[lo:lo + chunk][rep] & masks[j]
                ok = _accept_rows(new_masks, accept)
                cand, j, new_masks = cand[ok], j[ok], new_masks[ok]
            simplices = np.concatenate([cand, j[:, None]], axis=1)
            if len(simplices) and simplices.shape[1] > 2:
                ok = meb_radius_batch(coords[simplices]) < eps
                simplices = simplices[ok]
                if new_masks is not None:
                    new_masks = new_masks[ok]
            found.append(simplices)
            found_masks.append(new_masks)
            total += len(simplices)
            if budget is not None and total > budget:
                raise ResourceExceeded(
                    f"complex exceeds the simplex budget {budget} at cardinality {simplices.shape[1]}")
        nxt = np.concatenate(found, axis=0) if found else np.zeros((0, S.shape[1] + 1), dtype=np.int64)
        if not len(nxt):
            break
        levels.append(nxt)
        if masks is not None:
            level_masks = np.concatenate(found_masks, axis=0)
    out = []
    for L in levels:
        glob = ids[L]
        glob = glob[np.lexsort(glob.T[::-1])]
        out.append(tuple(map(tuple, glob.tolist())))
    return SimplicialComplex(tuple(out))


def _accept_rows(masks: np.ndarray, accept: Callable[[int], bool]) -> np.ndarray:
    """accept() on each row of a (N, W) uint64 bitmask array, evaluated once per distinct row."""
    if len(masks) == 0:
        return np.zeros(0, dtype=bool)
    uniq, inverse = np.unique(masks, axis=0, return_inverse=True)
    verdict = np.array([accept(_row_to_int(row)) for row in uniq], dtype=bool)
    return verdict[np.asarray(inverse).reshape(-1)]


def _row_to_int(row) -> int:
    return sum(int(w) << (64 * i) for i, w in enumerate(row))


def cech_complex(X, eps: float, max_card: int, ids=None, budget: int | None = None) -> SimplicialComplex:
    """Truncated Cech complex of a PointCloud, or of raw coordinates with optional vertex ids."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    if isinstance(X, PointCloud):
        ids, coords = X.indices, X.points
    else:
        coords = np.atleast_2d(np.asarray(X, dtype=float))
        if coords.size == 0:
            return SimplicialComplex(())
        ids = np.arange(len(coords)) if ids is None else np.asarray(ids)
    if len(ids) == 0:
        return SimplicialComplex(())
    return _enumerate(np.asarray(ids), coords, eps, max_card, budget=budget)


def _key(atom: LaxAtom) -> tuple[int, int, str]:
    return (atom.poly, atom.threshold, atom.rel)


def compile_mask_formula(phi: Formula, bits: Mapping[tuple[int, int, str], int]) -> Callable[[int], bool]:
    """phi as a predicate on an integer bitmask of cloud memberships."""

    def build(node):
        if isinstance(node, LaxAtom):
            bit = 1 << bits[_key(node)]
            return lambda m: bool(m & bit)
        if isinstance(node, Not):
            raise ValueError("combined complexes need a negation-free formula")
        kids = [build(a) for a in node.args]
        if isinstance(node, And):
            return lambda m: all(k(m) for k in kids)
        if isinstance(node, Or):
            return lambda m: any(k(m) for k in kids)
        raise TypeError(f"unexpected node {node!r}")

    fn = build(phi)
    memo: dict[int, bool] = {}

    def cached(m: int) -> bool:
        v = memo.get(m)
        if v is None:
            v = memo[m] = fn(m)
        return v

    return cached


def combine(phi: Formula, clouds: Mapping[tuple[int, int, str], PointCloud], eps: float,
            max_card: int, budget: int | None = None) -> SimplicialComplex:
    """phi applied to the truncated Cech complexes of the atomic clouds.

    A candidate simplex sigma of the union of clouds is kept iff its enclosing
    radius is < eps and phi is true when each atom (i, j, alpha) is read as
    "sigma is contained in X^alpha_{i,j}". Since the Cech criterion is the same
    for every cloud, this equals the recursive union/intersection of the
    per-atom complexes.
    """
    keys = sorted({_key(a) for a in atoms(phi)})
    missing = [k for k in keys if k not in clouds]
    if missing:
        raise KeyError(f"no cloud for atoms {missing}")
    bits = {k: b for b, k in enumerate(keys)}
    grid = None
    members = []
    for k in keys:
        cloud = clouds[k]
        if grid is None:
            grid = cloud.grid
        elif cloud.grid is not grid:
            raise ValueError("all clouds must share one grid")
        members.append(cloud.indices)
    if grid is None:
        return SimplicialComplex(())
    V = np.unique(np.concatenate(members)) if members else np.zeros(0, dtype=np.int64)
    if len(V) == 0:
        return SimplicialComplex(())
    words = (len(keys) + 63) // 64
    masks = np.zeros((len(V), words), dtype=np.uint64)
    for k, idx in zip(keys, members):
        b = bits[k]
        masks[np.searchsorted(V, idx), b // 64] |= np.uint64(1 << (b % 64))
    accept = compile_mask_formula(phi, bits)
    return _enumerate(V, grid.points[V], eps, max_card, masks=masks, accept=accept, budget=budget)


def apply_formula_to_complexes(phi: Formula, complexes: Mapping[tuple[int, int, str], SimplicialComplex]
                               ) -> SimplicialComplex:
    """Literal recursive construction: unions at Or, intersections at And."""

    def walk(node) -> set:
        if isinstance(node, LaxAtom):
            return complexes[_key(node)].as_set()
        if isinstance(node, Not):
            raise ValueError("negation-free formula required")
        parts = [walk(a) for a in node.args]
        out = parts[0]
        for p in parts[1:]:
            out = (out & p) if isinstance(node, And) else (out | p)
        return out

    return SimplicialComplex.from_simplices(walk(phi))
