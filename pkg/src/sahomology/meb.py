"""Minimum enclosing balls in R^d (move-to-front Welzl, SLSQP fallback)."""
from __future__ import annotations

import math

import numpy as np
from scipy.optimize import minimize

_RTOL = 1e-12
_ATOL = 1e-14


def circumball(R: np.ndarray) -> tuple[np.ndarray, float]:
    """Smallest ball with every point of R on its boundary (center in their affine hull)."""
    R = np.asarray(R, dtype=float)
    if len(R) == 1:
        return R[0].copy(), 0.0
    if len(R) == 2:
        c = (R[0] + R[1]) / 2.0
        return c, float(np.linalg.norm(R[0] - R[1])) / 2.0
    A = R[1:] - R[0]
    G = A @ A.T
    b = 0.5 * np.diag(G)
    try:
        lam = np.linalg.solve(G, b)
    except np.linalg.LinAlgError:
        lam = np.linalg.lstsq(G, b, rcond=None)[0]
    c = R[0] + lam @ A
    return c, float(np.max(np.linalg.norm(R - c, axis=1)))


def _inside(ball, p) -> bool:
    c, r = ball
    return float(np.linalg.norm(p - c)) <= r * (1.0 + _RTOL) + _ATOL


def _mtf(P: list, end: int, R: list, dim: int):
    ball = circumball(np.array(R)) if R else None
    if len(R) == dim + 1:
        return ball
    i = 0
    while i < end:
        p = P[i]
        if ball is None or not _inside(ball, p):
            ball = _mtf(P, i, R + [p], dim)
            P.insert(0, P.pop(i))
        i += 1
    return ball


def _convex_fallback(P: np.ndarray) -> tuple[np.ndarray, float]:
    c0 = P.mean(axis=0)
    s0 = float(np.max(np.sum((P - c0) ** 2, axis=1)))
    x0 = np.append(c0, s0)
    cons = {"type": "ineq", "fun": lambda z: z[-1] - np.sum((P - z[:-1]) ** 2, axis=1)}
    res = minimize(lambda z: z[-1], x0, constraints=[cons], method="SLSQP",
                   options={"ftol": 1e-15, "maxiter": 500})
    c = res.x[:-1]
    return c, float(np.max(np.linalg.norm(P - c, axis=1)))


def minimum_enclosing_ball(points) -> tuple[np.ndarray, float]:
    P = np.atleast_2d(np.asarray(points, dtype=float))
    if P.size == 0 or len(P) == 0:
        raise ValueError("minimum enclosing ball of an empty set")
    if len(P) <= 2:
        return circumball(P)
    ball = _mtf([p for p in P], len(P), [], P.shape[1])
    c = ball[0]
    r = float(np.max(np.linalg.norm(P - c, axis=1)))
    if r > ball[1] * (1 + 1e-9) + 1e-12:
        c, r = _convex_fallback(P)
    return c, r


def meb_radius(points) -> float:
    return minimum_enclosing_ball(points)[1]


def jung_bound(diameter: float, dim: int) -> float:
    """Upper bound on the enclosing radius of a set with this diameter in R^dim."""
    return diameter * math.sqrt(dim / (2.0 * (dim + 1)))


def _support_subsets(k: int, dim: int) -> list[tuple[int, ...]]:
    from itertools import combinations
    return [S for s in range(2, min(k, dim + 1) + 1) for S in combinations(range(k), s)]


def meb_radius_batch(P: np.ndarray, rtol: float = 1e-10) -> np.ndarray:
    """Enclosing radii of B point sets at once, P of shape (B, k, d).

    The minimum enclosing ball is the circumball (center in the affine hull) of
    an affinely independent support subset, so it is the smallest circumball of
    a subset of at most d + 1 points that encloses all k points.
    """
    P = np.asarray(P, dtype=float)
    B, k, d = P.shape
    if k == 1:
        return np.zeros(B)
    if k == 2:
        return np.linalg.norm(P[:, 0] - P[:, 1], axis=1) / 2.0
    best = np.full(B, np.inf)
    for S in _support_subsets(k, d):
        base = P[:, S[0]]
        A = P[:, list(S[1:])] - base[:, None, :]
        if len(S) == 2:
            c = base + A[:, 0] / 2.0
            ok = np.ones(B, dtype=bool)
        else:
            G = A @ np.swapaxes(A, 1, 2)
            scale = np.einsum("bii->b", G)
            det = np.linalg.det(G)
            ok = np.abs(det) > 1e-13 * scale ** G.shape[1]
            G[~ok] = np.eye(G.shape[1])
            lam = np.linalg.solve(G, 0.5 * np.einsum("bii->bi", G)[..., None])[..., 0]
            c = base + np.einsum("bs,bsd->bd", lam, A)
        dist = np.linalg.norm(P - c[:, None, :], axis=2)
        r_support = dist[:, list(S)].max(axis=1)
        encloses = dist.max(axis=1) <= r_support * (1.0 + rtol) + 1e-15
        cand = np.where(ok & encloses, dist.max(axis=1), np.inf)
        np.minimum(best, cand, out=best)
    return best
