"""Covering grids on the unit sphere S^n built from lattices on the cube faces.

Each face of [-1, 1]^(n+1) carries a uniform lattice; lattice points are
radially projected onto S^n. The lattice spacing is at most
2^-l / (2 sqrt(n)), which keeps the angular covering radius below 2^-l
(radial projection from the cube surface onto the sphere is 1-Lipschitz,
since it is the metric projection onto the unit ball).

Points on cube edges belong to several faces; each is kept once, on the
first face in (axis, sign) order that contains it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ResourceExceeded

DEFAULT_BUDGET = 5_000_000


def lattice_intervals(n: int, level: int) -> int:
    """Number N of lattice intervals per face edge (spacing 2/N <= 2^-l / (2 sqrt n))."""
    return math.ceil(4.0 * math.sqrt(n) * 2.0 ** level - 1e-12)


def faces(n: int) -> list[tuple[int, int]]:
    return [(axis, sign) for axis in range(n + 1) for sign in (-1, 1)]


def grid_size(n: int, level: int) -> int:
    """Exact point count of build_grid(n, level) without building it."""
    N = lattice_intervals(n, level)
    total = 0
    for axis in range(n + 1):
        # coordinates before `axis` are interior (N - 1 choices), after it free (N + 1)
        total += 2 * (N - 1) ** axis * (N + 1) ** (n - axis)
    return total


def size_bound(n: int, level: int) -> int:
    return 2 * (n + 1) * math.ceil(4 * math.sqrt(n) * 2 ** level + 1) ** n


@dataclass(frozen=True, eq=False)
class Grid:
    n: int
    level: int
    points: np.ndarray
    intervals: int

    @property
    def covering_radius(self) -> float:
        """Nominal covering radius r_l = 2^-l (angular)."""
        return 2.0 ** -self.level

    @property
    def certified_radius(self) -> float:
        """Angular covering radius actually guaranteed by the lattice spacing."""
        chord = (2.0 / self.intervals) * math.sqrt(self.n) / 2.0
        return 2.0 * math.asin(min(1.0, chord / 2.0))

    @property
    def spacing(self) -> float:
        return 2.0 / self.intervals

    def __len__(self) -> int:
        return self.points.shape[0]


def _face_lattice(n: int, N: int, axis: int, sign: int) -> np.ndarray:
    """Integer lattice coordinates (values 0..N) of the points owned by one face."""
    ranges = []
    for b in range(n + 1):
        if b == axis:
            ranges.append(np.array([0 if sign < 0 else N]))
        elif b < axis:
            ranges.append(np.arange(1, N))
        else:
            ranges.append(np.arange(0, N + 1))
    mesh = np.meshgrid(*ranges, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def build_grid(n: int, level: int, budget: int | None = DEFAULT_BUDGET) -> Grid:
    if n < 1 or level < 0:
        raise ValueError("need n >= 1 and level >= 0")
    count = grid_size(n, level)
    if budget is not None and count > budget:
        raise ResourceExceeded(f"grid G_{level} on S^{n} has {count} points, budget is {budget}",
                               required_level=level, required_points=count)
    N = lattice_intervals(n, level)
    blocks = []
    for axis, sign in faces(n):
        lat = _face_lattice(n, N, axis, sign)
        cube = -1.0 + 2.0 * lat / N
        cube[:, axis] = float(sign)
        blocks.append(cube)
    cube = np.concatenate(blocks, axis=0)
    points = cube / np.linalg.norm(cube, axis=1, keepdims=True)
    points.setflags(write=False)
    return Grid(n=n, level=level, points=points, intervals=N)


def snap_to_lattice(x: np.ndarray, n: int, level: int) -> np.ndarray:
    """Grid points of G_l near each row of x, computed without building the grid.

    The returned point is the lattice point nearest to the central projection of
    x onto its cube face; it is a member of G_l (possibly owned by another face).
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    N = lattice_intervals(n, level)
    axis = np.argmax(np.abs(x), axis=1)
    scale = np.abs(x[np.arange(len(x)), axis])
    cube = x / scale[:, None]
    k = np.rint((cube + 1.0) * N / 2.0)
    snapped = -1.0 + 2.0 * k / N
    snapped[np.arange(len(x)), axis] = np.sign(x[np.arange(len(x)), axis])
    return snapped / np.linalg.norm(snapped, axis=1, keepdims=True)


def angular_distance(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Great-circle distance between unit vectors (rows), stable for tiny angles."""
    chord = np.linalg.norm(np.asarray(a) - np.asarray(b), axis=-1)
    return 2.0 * np.arcsin(np.minimum(1.0, chord / 2.0))


def random_sphere_points(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    x = rng.standard_normal((count, n + 1))
    return x / np.linalg.norm(x, axis=1, keepdims=True)

