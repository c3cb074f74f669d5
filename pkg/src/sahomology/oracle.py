"""Independent references: exact membership predicates, stratum signatures, planar homology.

Nothing here shares code paths with sampling or the Cech construction; the
planar homology reference only reuses the integer homology back end.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .complex import SimplicialComplex
from .formula import Atom, Formula, LaxAtom, atoms, eval_formula, relation_holds
from .homology import HomologySummary, homology_groups
from .poly import PolyTuple

SIGNATURE_TOL = 1e-9


def member_affine(p: PolyTuple, psi: Formula, x) -> bool | np.ndarray:
    """x in W(p, psi): psi evaluated on the exact signs of p(x) (one point or a batch)."""
    vals = p.evaluate(np.asarray(x, dtype=float))

    def truth(a):
        if not isinstance(a, Atom):
            raise TypeError("affine membership needs plain sign atoms")
        return relation_holds(a.rel, vals[..., a.poly], 0.0)

    return eval_formula(psi, truth)


def member_sphere(f: PolyTuple, t, phi: Formula, x, r: float = 0.0, strict: bool = False) -> bool | np.ndarray:
    """x in S_r(f, t, phi) (closed relaxation) or, with strict=True, in the open S°_r.

    Lax atoms f_i >= t_j ||f_i|| become f_i >= (t_j - r)||f_i|| (f_i > ... when
    strict), and dually for <=. Plain sign atoms are evaluated as they stand.
    r = 0 and strict=False gives S(f, t, phi) itself.
    """
    if r < 0:
        raise ValueError("r must be >= 0")
    t = np.asarray(t, dtype=float)
    x = np.asarray(x, dtype=float)
    vals = f.evaluate(x)
    norms = f.norms

    def truth(a):
        v = vals[..., a.poly]
        if isinstance(a, LaxAtom):
            if a.rel == ">=":
                rhs = (t[a.threshold] - r) * norms[a.poly]
                return v > rhs if strict else v >= rhs
            rhs = (t[a.threshold] + r) * norms[a.poly]
            return v < rhs if strict else v <= rhs
        return relation_holds(a.rel, v, 0.0)

    return eval_formula(phi, truth)


@dataclass(frozen=True)
class StratumSignature:
    """Ordered partition (I_{.,0}, I_{o,0}, ..., I_{.,m}, I_{o,m}) of the 0-based indices, and signs."""

    parts: tuple[frozenset, ...]
    sigma: tuple[int, ...]

    @property
    def m(self) -> int:
        return len(self.parts) // 2 - 1

    def on(self, k: int) -> frozenset:
        """I_{.,k}: indices with |f_i(x)|/||f_i|| equal to lambda_{i,k}."""
        return self.parts[2 * k]

    def between(self, k: int) -> frozenset:
        """I_{o,k}: indices strictly between lambda_{i,k} and lambda_{i,k+1} (above lambda_{i,m} for k = m)."""
        return self.parts[2 * k + 1]


def stratum_signature(f: PolyTuple, lam, x, tol: float = SIGNATURE_TOL) -> StratumSignature:
    lam = np.asarray(lam, dtype=float)
    q = f.q
    if lam.ndim != 2 or lam.shape[0] != q:
        raise ValueError("lambda must have one row per polynomial")
    if np.any(lam[:, 0] != 0) or np.any(np.diff(lam, axis=1) <= 0):
        raise ValueError("lambda rows must start at 0 and increase strictly")
    m = lam.shape[1] - 1
    vals = f.evaluate(np.asarray(x, dtype=float))
    v = np.abs(vals) / f.norms
    parts = [set() for _ in range(2 * m + 2)]
    sigma = []
    for i in range(q):
        row = lam[i]
        hit = np.flatnonzero(np.abs(v[i] - row) <= tol)
        if len(hit):
            parts[2 * int(hit[0])].add(i)
        else:
            k = int(np.searchsorted(row, v[i]) - 1)
            parts[2 * k + 1].add(i)
        sigma.append(0 if i in parts[0] else int(np.sign(vals[i])))
    sig = StratumSignature(tuple(frozenset(s) for s in parts), tuple(sigma))
    assert set().union(*sig.parts) == set(range(q)) and sum(map(len, sig.parts)) == q
    return sig


# -- planar homology reference --------------------------------------------------


def _freudenthal_cells(M: int):
    """Open cells of the Freudenthal triangulation of the (2M+1)^2 lattice, by dimension.

    Vertices are flat lattice indices; each square (i, j) is cut along its
    (i, j)-(i+1, j+1) diagonal.
    """
    side = 2 * M + 1
    idx = np.arange(side * side).reshape(side, side)
    verts = idx.reshape(-1, 1)
    a, b = idx[:-1, :-1].ravel(), idx[1:, :-1].ravel()
    c, d = idx[:-1, 1:].ravel(), idx[1:, 1:].ravel()
    horiz = np.stack([idx[:-1, :].ravel(), idx[1:, :].ravel()], axis=1)
    vert = np.stack([idx[:, :-1].ravel(), idx[:, 1:].ravel()], axis=1)
    diag = np.stack([a, d], axis=1)
    edges = np.concatenate([horiz, vert, diag])
    tris = np.concatenate([np.stack([a, b, d], axis=1), np.stack([a, c, d], axis=1)])
    return [verts, np.sort(edges, axis=1), np.sort(tris, axis=1)]


def _open_cell_truth(vals: np.ndarray, cells: np.ndarray, bary: np.ndarray, rel: str) -> np.ndarray:
    """Does the atom hold somewhere on each open cell (equalities) / at its barycenter (the rest)?"""
    if rel == "=":
        v = vals[cells]
        zero = np.all(v == 0, axis=1)
        cross = np.any(v > 0, axis=1) & np.any(v < 0, axis=1)
        return zero | cross
    return relation_holds(rel, bary, 0.0)


def planar_cells(p: PolyTuple, psi: Formula, R: float, h: float) -> list[np.ndarray]:
    """Open cells of the triangulated box [-Mh, Mh]^2 (M = round(R/h)) on which psi is judged to hold."""
    if p.num_vars != 2:
        raise ValueError("planar reference needs n = 2")
    M = int(round(R / h))
    if M < 1:
        raise ValueError("resolution too coarse for the box")
    coords = (np.arange(2 * M + 1) - M) * h
    X, Y = np.meshgrid(coords, coords, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    vals = p.evaluate(pts)
    kept = []
    for cells in _freudenthal_cells(M):
        centers = pts[cells].mean(axis=1)
        cvals = p.evaluate(centers)
        truth = {a: _open_cell_truth(vals[:, a.poly], cells, cvals[:, a.poly], a.rel) for a in atoms(psi)}
        mask = np.asarray(eval_formula(psi, truth), dtype=bool)
        kept.append(cells[mask])
    return kept


def order_complex(cells: list[np.ndarray]) -> SimplicialComplex:
    """Order complex of the face poset restricted to the given cells (vertices are cell ids)."""
    # number cells in spatial order (by their vertices), which keeps the reduction local
    flat = sorted((c for block in cells for c in map(tuple, block.tolist())), key=lambda c: (c[-1], c))
    ident = {c: i for i, c in enumerate(flat)}
    chains = []
    for c, cid in ident.items():
        chains.append((cid,))
        faces = [f for r in range(1, len(c)) for f in combinations(c, r) if f in ident]
        for f in faces:
            chains.append((ident[f], cid))
            for g in combinations(f, 1) if len(f) == 2 else ():
                if g in ident:
                    chains.append((ident[g], ident[f], cid))
    return SimplicialComplex.from_simplices(chains)


def cubical_homology_2d(p: PolyTuple, psi: Formula, R: float, h: float) -> HomologySummary:
    """Brute-force homology of W(p, psi) cut to the box [-R, R]^2 at pitch h.

    The box is triangulated (Freudenthal, with the origin a lattice vertex) and
    each open cell is kept when psi holds on it: strict and lax atoms are read
    at the cell barycenter, and an equality atom holds on an open cell when the
    polynomial vanishes at all its vertices or takes both strict signs on them.
    The kept open cells are replaced by the order complex of their face poset.
    Reliable when the set's features are much larger than h and the set meets
    the box boundary transversally or not at all.
    """
    return homology_groups(order_complex(planar_cells(p, psi, R, h)), 2)
