"""Sparse multivariate polynomials with Weyl norms and homogenization.

Coefficients are floats keyed by integer exponent tuples. Evaluation goes
through a dense exponent matrix in canonical (lexicographic) term order, so
results are bit-identical across runs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from math import factorial, sqrt
from typing import Iterable, Mapping, Sequence

import numpy as np

Exponent = tuple[int, ...]


def multinomial(exponent: Sequence[int]) -> int:
    """|a|! / prod(a_i!) for a nonnegative integer vector a."""
    out = factorial(sum(exponent))
    for a in exponent:
        out //= factorial(a)
    return out


@dataclass(frozen=True, eq=False)
class Polynomial:
    num_vars: int
    degree: int
    terms: tuple[tuple[Exponent, float], ...]

    def __post_init__(self):
        for alpha, c in self.terms:
            if len(alpha) != self.num_vars:
                raise ValueError(f"exponent {alpha} has wrong length for {self.num_vars} variables")
            if min(alpha, default=0) < 0:
                raise ValueError(f"negative exponent in {alpha}")
            if sum(alpha) > self.degree:
                raise ValueError(f"term {alpha} exceeds degree bound {self.degree}")
            if c == 0:
                raise ValueError("explicit zero coefficient")

    @classmethod
    def from_terms(cls, num_vars: int, terms: Mapping[Exponent, float] | Iterable[tuple[Exponent, float]],
                   degree: int | None = None) -> "Polynomial":
        """Build a polynomial, merging repeated exponents and dropping zeros."""
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Exponent, float] = {}
        for alpha, c in items:
            alpha = tuple(int(a) for a in alpha)
            acc[alpha] = acc.get(alpha, 0.0) + float(c)
        clean = tuple(sorted((a, c) for a, c in acc.items() if c != 0.0))
        if degree is None:
            degree = max((sum(a) for a, _ in clean), default=0)
        return cls(num_vars, int(degree), clean)

    @classmethod
    def variable(cls, num_vars: int, index: int, coeff: float = 1.0) -> "Polynomial":
        alpha = [0] * num_vars
        alpha[index] = 1
        return cls.from_terms(num_vars, {tuple(alpha): coeff}, degree=1)

    @classmethod
    def constant(cls, num_vars: int, value: float) -> "Polynomial":
        return cls.from_terms(num_vars, {(0,) * num_vars: value}, degree=0)

    # -- structure -----------------------------------------------------------

    @cached_property
    def exponents(self) -> np.ndarray:
        if not self.terms:
            return np.zeros((0, self.num_vars), dtype=np.int64)
        return np.array([a for a, _ in self.terms], dtype=np.int64).reshape(-1, self.num_vars)

    @cached_property
    def coeffs(self) -> np.ndarray:
        return np.array([c for _, c in self.terms], dtype=float)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_homogeneous(self) -> bool:
        return all(sum(a) == self.degree for a, _ in self.terms)

    def as_dict(self) -> dict[Exponent, float]:
        return dict(self.terms)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return (self.num_vars, self.degree, self.terms) == (other.num_vars, other.degree, other.terms)

    def __hash__(self):
        return hash((self.num_vars, self.degree, self.terms))

    def __repr__(self):
        if not self.terms:
            return f"Polynomial(0, n={self.num_vars}, d={self.degree})"
        parts = []
        for alpha, c in self.terms:
            mono = "*".join(f"X{i}^{a}" if a > 1 else f"X{i}" for i, a in enumerate(alpha) if a)
            parts.append(f"{c:+g}" + (f"*{mono}" if mono else ""))
        return f"Polynomial({' '.join(parts)}, d={self.degree})"

    # -- arithmetic (only what the pipeline and its tests need) --------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        acc = self.as_dict()
        for a, c in other.terms:
            acc[a] = acc.get(a, 0.0) + c
        return Polynomial.from_terms(self.num_vars, acc, degree=max(self.degree, other.degree))

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + other.scale(-1.0)

    def __mul__(self, other: "Polynomial") -> "Polynomial":
        acc: dict[Exponent, float] = {}
        for a, c in self.terms:
            for b, e in other.terms:
                k = tuple(x + y for x, y in zip(a, b))
                acc[k] = acc.get(k, 0.0) + c * e
        return Polynomial.from_terms(self.num_vars, acc, degree=self.degree + other.degree)

    def scale(self, c: float) -> "Polynomial":
        return Polynomial.from_terms(self.num_vars, [(a, c * v) for a, v in self.terms], degree=self.degree)

    def derivative(self, var: int) -> "Polynomial":
        terms = []
        for alpha, c in self.terms:
            if alpha[var]:
                beta = list(alpha)
                beta[var] -= 1
                terms.append((tuple(beta), c * alpha[var]))
        return Polynomial.from_terms(self.num_vars, terms, degree=max(self.degree - 1, 0))

    def compose_linear(self, U: np.ndarray) -> "Polynomial":
        """Coefficients of x -> p(U x), expanded exactly term by term."""
        U = np.asarray(U, dtype=float)
        n = self.num_vars
        rows = [Polynomial.from_terms(n, {tuple(int(i == j) for i in range(n)): U[k, j] for j in range(n)}, degree=1)
                for k in range(n)]
        out = Polynomial.from_terms(n, {}, degree=self.degree)
        for alpha, c in self.terms:
            term = Polynomial.constant(n, c)
            for k, a in enumerate(alpha):
                for _ in range(a):
                    term = term * rows[k]
            out = out + term
        return Polynomial.from_terms(n, out.terms, degree=self.degree)

    # -- evaluation ------------------------------------------------------------

    def evaluate(self, x) -> float | np.ndarray:
        """Value at a point (shape (n,)) or at a batch of points (shape (N, n))."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        if x.shape[-1] != self.num_vars:
            raise ValueError(f"point has dimension {x.shape[-1]}, polynomial has {self.num_vars} variables")
        X = x.reshape(1, -1) if single else x
        if not self.terms:
            out = np.zeros(X.shape[0])
        else:
            mono = np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)
            out = mono @ self.coeffs
        return float(out[0]) if single else out

    __call__ = evaluate

    def homogenize(self, degree: int | None = None) -> "Polynomial":
        """p^h(X0, X1..Xn) = X0^d p(X1/X0, ..., Xn/X0), new variable first."""
        d = self.degree if degree is None else degree
        terms = [((d - sum(a),) + a, c) for a, c in self.terms]
        return Polynomial(self.num_vars + 1, d, tuple(sorted(terms)))


def weyl_norm(p: Polynomial) -> float:
    """Weyl norm; affine polynomials are measured through their degree-d homogenization."""
    d = p.degree
    total = 0.0
    for alpha, c in p.terms:
        total += c * c / multinomial((d - sum(alpha),) + alpha)
    return sqrt(total)


def evaluate(p: Polynomial, x) -> float | np.ndarray:
    return p.evaluate(x)


@dataclass(frozen=True)
class PolyTuple:
    polys: tuple[Polynomial, ...]

    def __post_init__(self):
        polys = tuple(self.polys)
        object.__setattr__(self, "polys", polys)
        if not polys:
            raise ValueError("empty polynomial tuple")
        if len({p.num_vars for p in polys}) != 1:
            raise ValueError("polynomials must share the number of variables")

    def __len__(self):
        return len(self.polys)

    def __getitem__(self, i):
        return self.polys[i]

    def __iter__(self):
        return iter(self.polys)

    @property
    def num_vars(self) -> int:
        return self.polys[0].num_vars

    @property
    def q(self) -> int:
        return len(self.polys)

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(p.degree for p in self.polys)

    @property
    def D(self) -> int:
        return max(self.degrees)

    @property
    def N(self) -> int:
        """Dimension of the coefficient space of the degree pattern."""
        from math import comb
        n = self.num_vars
        if self.is_homogeneous:
            return sum(comb(d + n - 1, n - 1) for d in self.degrees)
        return sum(comb(d + n, n) for d in self.degrees)

    @property
    def is_homogeneous(self) -> bool:
        return all(p.is_homogeneous for p in self.polys)

    @cached_property
    def norms(self) -> np.ndarray:
        return np.array([weyl_norm(p) for p in self.polys])

    def weyl_norm(self) -> float:
        return float(sqrt(np.sum(self.norms ** 2)))

    @cached_property
    def gradients(self) -> tuple[tuple[Polynomial, ...], ...]:
        return tuple(tuple(p.derivative(v) for v in range(self.num_vars)) for p in self.polys)

    def evaluate(self, x) -> np.ndarray:
        """Values, shape (q,) for one point or (N, q) for a batch."""
        x = np.asarray(x, dtype=float)
        vals = [p.evaluate(x) for p in self.polys]
        return np.array(vals) if x.ndim == 1 else np.stack(vals, axis=1)

    __call__ = evaluate

    def jacobian(self, x) -> np.ndarray:
        """Euclidean Jacobian, shape (q, n) or (N, q, n)."""
        x = np.asarray(x, dtype=float)
        rows = [[g.evaluate(x) for g in grads] for grads in self.gradients]
        if x.ndim == 1:
            return np.array(rows, dtype=float).reshape(self.q, self.num_vars)
        return np.stack([np.stack(r, axis=1) for r in rows], axis=1)

    def subtuple(self, indices: Sequence[int]) -> "PolyTuple":
        return PolyTuple(tuple(self.polys[i] for i in indices))


def tuple_norm(f: PolyTuple) -> float:
    return f.weyl_norm()


def tangent_jacobian(f: PolyTuple, x, tol: float = 1e-9) -> np.ndarray:
    """Derivative of f on the sphere at unit x: gradients projected orthogonally to x.

    Works on a single point (returns (q, n+1)) or a batch (returns (N, q, n+1)).
    """
    x = np.asarray(x, dtype=float)
    norms = np.linalg.norm(x, axis=-1)
    if np.any(np.abs(norms - 1.0) > tol):
        raise ValueError("tangent_jacobian needs unit points")
    J = f.jacobian(x)
    if x.ndim == 1:
        return J - np.outer(J @ x, x)
    radial = np.einsum("nqk,nk->nq", J, x)
    return J - radial[:, :, None] * x[:, None, :]


def homogenize_tuple(p: PolyTuple) -> PolyTuple:
    """H(p) = (||p|| X0, p_1^h, ..., p_q^h) in one more variable."""
    n1 = p.num_vars + 1
    lead = Polynomial.variable(n1, 0, coeff=p.weyl_norm())
    if lead.is_zero:
        raise ValueError("cannot homogenize the zero tuple")
    return PolyTuple((lead,) + tuple(q.homogenize() for q in p.polys))
