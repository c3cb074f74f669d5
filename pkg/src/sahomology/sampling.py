"""Atomic point clouds on a grid, and Hausdorff distances."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np
from scipy.spatial import cKDTree

from .grid import Grid
from .poly import PolyTuple

CHUNK = 65536


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Grid points x with f_i(x) > (t_j + tol)||f_i|| (rel ">=") or < (t_j - tol)||f_i|| (rel "<=")."""

    grid: Grid
    indices: np.ndarray
    tag: tuple[int, int, str]

    @property
    def points(self) -> np.ndarray:
        return self.grid.points[self.indices]

    def __len__(self) -> int:
        return len(self.indices)

    def __eq__(self, other):
        if not isinstance(other, PointCloud):
            return NotImplemented
        return self.grid is other.grid and self.tag == other.tag and np.array_equal(self.indices, other.indices)


def normalized_values(f: PolyTuple, points: np.ndarray) -> np.ndarray:
    """f_i(x) / ||f_i|| for every point (rows) and polynomial (columns)."""
    norms = f.norms
    if np.any(norms == 0):
        raise ValueError("zero polynomial in tuple")
    out = np.empty((len(points), f.q))
    for s in range(0, len(points), CHUNK):
        out[s:s + CHUNK] = f.evaluate(points[s:s + CHUNK]) / norms
    return out


def sampling_tolerance(f: PolyTuple, grid: Grid) -> float:
    return math.sqrt(f.D) * grid.covering_radius


def sample_atomic_clouds(f: PolyTuple, t, grid: Grid, needed: Iterable[tuple[int, int, str]] | None = None,
                         values: np.ndarray | None = None) -> dict[tuple[int, int, str], PointCloud]:
    """Clouds X^alpha_{i,j} for the requested (i, j, alpha) keys (all 2qe of them by default).

    ``values`` may carry precomputed normalized values on the grid.
    """
    t = np.asarray(t, dtype=float)
    if needed is None:
        needed = [(i, j, a) for i in range(f.q) for j in range(len(t)) for a in ("<=", ">=")]
    V = normalized_values(f, grid.points) if values is None else values
    tol = sampling_tolerance(f, grid)
    clouds = {}
    for i, j, alpha in sorted(set(needed)):
        if alpha == ">=":
            mask = V[:, i] > t[j] + tol
        elif alpha == "<=":
            mask = V[:, i] < t[j] - tol
        else:
            raise ValueError(f"cloud relation must be <= or >=, got {alpha!r}")
        idx = np.flatnonzero(mask)
        idx.setflags(write=False)
        clouds[(i, j, alpha)] = PointCloud(grid, idx, (i, j, alpha))
    return clouds


def directed_hausdorff(A, B) -> float:
    """max over a in A of the Euclidean distance from a to B."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if len(A) == 0:
        return 0.0
    if len(B) == 0:
        return math.inf
    d, _ = cKDTree(B).query(A)
    return float(np.max(d))


def hausdorff(A, B) -> float:
    """Symmetric Hausdorff distance; infinite when exactly one side is empty."""
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    if len(A) == 0 and len(B) == 0:
        return 0.0
    if len(A) == 0 or len(B) == 0:
        return math.inf
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def export_clouds_csv(path, clouds: dict[tuple[int, int, str], PointCloud]) -> None:
    with open(path, "w") as fh:
        dim = None
        for (i, j, alpha), cloud in sorted(clouds.items()):
            pts = cloud.points
            if dim is None:
                dim = pts.shape[1] if len(pts) else cloud.grid.points.shape[1]
                fh.write("poly,threshold,rel,grid_index," + ",".join(f"x{k}" for k in range(dim)) + "\n")
            for idx, x in zip(cloud.indices, pts):
                fh.write(f"{i},{j},{alpha},{idx}," + ",".join(repr(float(v)) for v in x) + "\n")
