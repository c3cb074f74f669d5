"""Pointwise condition numbers mu and kappa, and the global estimator.

For a subtuple g of f and a unit point x,

    kappa(g, x) = ( ||g(x)||^2 / ||g||^2 + mu(g, x)^-2 )^(-1/2),
    mu(g, x)    = ||g|| * || (D_x g)^+ Delta ||,

and kappa(f, x) is the maximum over all nonempty subtuples. When D_x g is
surjective, ||(D_x g)^+ Delta||^-1 is the least singular value of
Delta^-1 D_x g, so kappa(g, x) = ||g|| / sqrt(||g(x)||^2 + s_min^2); when it
is not surjective the same expression holds with s_min = 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import IllConditioned, ResourceExceeded
from .grid import faces
from .poly import PolyTuple, tangent_jacobian

RANK_RTOL = 1e-10
MAX_FULL_ENUMERATION = 12
CHUNK = 65536


@dataclass(frozen=True)
class ConditionEstimate:
    K: float
    level: int
    evaluations: int
    history: tuple[float, ...] = field(default=(), repr=False)


def mu(f: PolyTuple, x) -> float:
    """||f|| times the operator norm of the pseudoinverse of D_x f composed with Delta."""
    x = np.asarray(x, dtype=float)
    J = tangent_jacobian(f, x)
    s = np.linalg.svd(J, compute_uv=False)
    if len(s) < f.q or s[-1] <= RANK_RTOL * max(s[0], np.finfo(float).tiny):
        return math.inf
    delta = np.diag(np.sqrt(f.degrees))
    return f.weyl_norm() * float(np.linalg.norm(np.linalg.pinv(J) @ delta, 2))


def _subsets(q: int) -> list[tuple[int, ...]]:
    if q > MAX_FULL_ENUMERATION:
        raise ValueError(f"subset enumeration over q={q} polynomials is not supported (limit {MAX_FULL_ENUMERATION})")
    return [L for r in range(1, q + 1) for L in itertools.combinations(range(q), r)]


def _kappa_batch(f: PolyTuple, X: np.ndarray) -> np.ndarray:
    n = f.num_vars - 1
    vals = f.evaluate(X)
    rows = tangent_jacobian(f, X) / np.sqrt(np.asarray(f.degrees, dtype=float))[None, :, None]
    norms2 = f.norms ** 2
    best = np.zeros(len(X))
    for L in _subsets(f.q):
        idx = list(L)
        gx2 = np.sum(vals[:, idx] ** 2, axis=1)
        if len(idx) > n:
            smin2 = 0.0
        elif len(idx) == 1:
            smin2 = np.sum(rows[:, idx[0], :] ** 2, axis=1)
        else:
            R = rows[:, idx, :]
            gram = R @ np.swapaxes(R, 1, 2)
            smin2 = np.clip(np.linalg.eigvalsh(gram)[:, 0], 0.0, None)
        denom = gx2 + smin2
        with np.errstate(divide="ignore"):
            kap = np.where(denom > 0, np.sqrt(norms2[idx].sum() / np.where(denom > 0, denom, 1.0)), np.inf)
        np.maximum(best, kap, out=best)
    return best


def kappa_point(f: PolyTuple, x) -> float | np.ndarray:
    """kappa(f, x) at a unit point, or at each row of a batch."""
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        return float(_kappa_batch(f, x[None, :])[0])
    out = np.empty(len(x))
    for s in range(0, len(x), CHUNK):
        out[s:s + CHUNK] = _kappa_batch(f, x[s:s + CHUNK])
    return out


def lipschitz_constant(f: PolyTuple) -> float:
    """Lipschitz constant used for x -> 1/kappa(f, x) in the angular metric."""
    return 2.0 * f.D


def _cell_radius(side: float, n: int) -> float:
    chord = side * math.sqrt(n) / 2.0
    return 2.0 * math.asin(min(1.0, chord / 2.0))


def _split(centers: np.ndarray, side: float) -> np.ndarray:
    """Centers of the 2^n dyadic children of each face square."""
    dim = centers.shape[1]
    face_axis = np.argmax(np.abs(centers), axis=1)
    out = []
    for axis in range(dim):
        group = centers[face_axis == axis]
        if not len(group):
            continue
        others = [b for b in range(dim) if b != axis]
        for signs in itertools.product((-0.25, 0.25), repeat=dim - 1):
            kid = group.copy()
            kid[:, others] += np.array(signs) * side
            out.append(kid)
    return np.concatenate(out, axis=0)


def estimate_kappa(f: PolyTuple, cap: float = 1e6, *, lipschitz: float | None = None,
                   max_depth: int = 40, max_cells: int = 20_000_000) -> ConditionEstimate:
    """Return K with 0.99 * kbar(f) <= K <= kbar(f), kbar(f) = max over the sphere of kappa(f, .).

    The sphere is covered by the radial images of dyadic squares on the cube
    faces. A square whose center has condition kappa_c and whose image has
    angular radius rho cannot contain a point with 1/kappa below
    1/kappa_c - L*rho. Squares that could still beat K/0.99 are split; the
    search stops when none remain. K is always an attained value, so K <= kbar.

    Raises IllConditioned once an attained value exceeds ``cap`` and
    ResourceExceeded if the refinement outgrows ``max_depth``/``max_cells``.
    """
    if cap <= 1:
        raise ValueError("cap must exceed 1")
    if not f.is_homogeneous:
        raise ValueError("estimate_kappa needs a homogeneous tuple")
    n = f.num_vars - 1
    L = lipschitz_constant(f) if lipschitz is None else lipschitz
    centers = []
    for axis, sign in faces(n):
        c = np.zeros(n + 1)
        c[axis] = sign
        centers.append(c)
    centers = np.array(centers)
    side = 2.0
    best = 1.0
    history = []
    evaluations = 0
    # children offsets: +-side/4 in every coordinate except the face axis
    for depth in range(max_depth + 1):
        pts = centers / np.linalg.norm(centers, axis=1, keepdims=True)
        kap = kappa_point(f, pts)
        evaluations += len(pts)
        best = max(best, float(np.max(kap)))
        history.append(best)
        if best > cap:
            raise IllConditioned(cap, best, depth)
        rho = _cell_radius(side, n)
        lower = 1.0 / kap - L * rho
        live = lower * best < 0.99
        if not np.any(live):
            return ConditionEstimate(K=best, level=depth, evaluations=evaluations, history=tuple(history))
        parents = centers[live]
        n_children = len(parents) * 2 ** n
        if n_children > max_cells:
            raise ResourceExceeded(f"condition estimate needs {n_children} cells at depth {depth + 1}",
                                   required_level=depth + 1, required_points=n_children)
        centers = _split(parents, side)
        side /= 2.0
    raise ResourceExceeded(f"condition estimate did not settle within depth {max_depth}",
                           required_level=max_depth + 1)
