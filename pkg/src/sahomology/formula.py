"""Boolean formulas over polynomial sign conditions, and their rewrites.

Atoms compare one polynomial with zero (``Atom``) or, after the
Gabrielov-Vorobjov rewrite, with a threshold multiple of its Weyl norm
(``LaxAtom``). Connectives are n-ary ``And``/``Or`` plus ``Not``. All nodes
are immutable and hashable.

Polynomial indices and threshold indices are 0-based throughout.
"""
from __future__ import annotations

import itertools
import operator
from dataclasses import dataclass
from functools import reduce
from typing import Any, Callable, Iterable, Mapping, Union

import numpy as np

RELATIONS = ("<", "<=", "=", ">=", ">")
STRICT_RELATIONS = ("<", "=", ">")

_COMPLEMENT = {"<": (">=",), "<=": (">",), "=": ("<", ">"), ">=": ("<",), ">": ("<=",)}


@dataclass(frozen=True)
class Atom:
    poly: int
    rel: str

    def __post_init__(self):
        if self.rel not in RELATIONS:
            raise ValueError(f"unknown relation {self.rel!r}")
        if self.poly < 0:
            raise ValueError("negative polynomial index")

    def __str__(self):
        return f"p{self.poly} {self.rel} 0"


@dataclass(frozen=True)
class LaxAtom:
    """f_poly rel t_threshold * ||f_poly||, rel in {<=, >=}."""

    poly: int
    threshold: int
    rel: str

    def __post_init__(self):
        if self.rel not in ("<=", ">="):
            raise ValueError(f"lax atoms use <= or >=, got {self.rel!r}")

    def __str__(self):
        return f"f{self.poly} {self.rel} t{self.threshold}|f{self.poly}|"


@dataclass(frozen=True)
class And:
    args: tuple

    def __init__(self, *args):
        if len(args) == 1 and isinstance(args[0], (list, tuple)):
            args = tuple(args[0])
        if not args:
            raise ValueError("And needs at least one argument")
        object.__setattr__(self, "args", tuple(args))

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or:
    args: tuple

    def __init__(self, *args):
        if len(args) == 1 and isinstance(args[0], (list, tuple)):
            args = tuple(args[0])
        if not args:
            raise ValueError("Or needs at least one argument")
        object.__setattr__(self, "args", tuple(args))

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Not:
    arg: Any

    def __str__(self):
        return f"~{self.arg}"


Formula = Union[Atom, LaxAtom, And, Or, Not]


class UnassignedAtom(KeyError):
    pass


class FormulaStageError(ValueError):
    pass


# -- inspection ------------------------------------------------------------------


def atoms(phi: Formula) -> set:
    if isinstance(phi, (Atom, LaxAtom)):
        return {phi}
    if isinstance(phi, Not):
        return atoms(phi.arg)
    return set().union(*(atoms(a) for a in phi.args))


def size(phi: Formula) -> int:
    """Number of atomic terms in the formula (connectives are not counted)."""
    if isinstance(phi, (Atom, LaxAtom)):
        return 1
    if isinstance(phi, Not):
        return size(phi.arg)
    return sum(size(a) for a in phi.args)


def node_count(phi: Formula) -> int:
    if isinstance(phi, (Atom, LaxAtom)):
        return 1
    if isinstance(phi, Not):
        return 1 + node_count(phi.arg)
    return 1 + sum(node_count(a) for a in phi.args)


def is_monotone(phi: Formula) -> bool:
    if isinstance(phi, Not):
        return False
    if isinstance(phi, (Atom, LaxAtom)):
        return True
    return all(is_monotone(a) for a in phi.args)


def is_strict(phi: Formula) -> bool:
    if isinstance(phi, Atom):
        return phi.rel in STRICT_RELATIONS
    if isinstance(phi, (Not, LaxAtom)):
        return False
    return all(is_strict(a) for a in phi.args)


def is_lax(phi: Formula) -> bool:
    if isinstance(phi, LaxAtom):
        return True
    if isinstance(phi, (Not, Atom)):
        return False
    return all(is_lax(a) for a in phi.args)


def stage(phi: Formula) -> str:
    if is_lax(phi):
        return "lax"
    if is_strict(phi):
        return "strict"
    if is_monotone(phi):
        return "monotone"
    return "raw"


def max_poly_index(phi: Formula) -> int:
    return max(a.poly for a in atoms(phi))


# -- rewrites --------------------------------------------------------------------


def eliminate_negations(phi: Formula) -> Formula:
    """Push negations to the atoms and absorb them into complemented relations."""

    def walk(node, negate):
        if isinstance(node, Not):
            return walk(node.arg, not negate)
        if isinstance(node, Atom):
            if not negate:
                return node
            comp = _COMPLEMENT[node.rel]
            if len(comp) == 1:
                return Atom(node.poly, comp[0])
            return Or(*(Atom(node.poly, r) for r in comp))
        if isinstance(node, LaxAtom):
            if negate:
                raise FormulaStageError("negated lax atom has no lax complement")
            return node
        kids = tuple(walk(a, negate) for a in node.args)
        if isinstance(node, And):
            return Or(kids) if negate else And(kids)
        return And(kids) if negate else Or(kids)

    return walk(phi, False)


def eliminate_lax(phi: Formula) -> Formula:
    """p >= 0 becomes (p = 0 | p > 0) and p <= 0 becomes (p = 0 | p < 0)."""
    if isinstance(phi, Not):
        raise FormulaStageError("eliminate_lax needs a negation-free formula")
    if isinstance(phi, Atom):
        if phi.rel == ">=":
            return Or(Atom(phi.poly, "="), Atom(phi.poly, ">"))
        if phi.rel == "<=":
            return Or(Atom(phi.poly, "="), Atom(phi.poly, "<"))
        return phi
    if isinstance(phi, LaxAtom):
        raise FormulaStageError("eliminate_lax works on formulas over p, not over (f, t)")
    return type(phi)(tuple(eliminate_lax(a) for a in phi.args))


def to_strict(phi: Formula) -> Formula:
    return eliminate_lax(eliminate_negations(phi))


def shift_polys(phi: Formula, offset: int) -> Formula:
    if isinstance(phi, Atom):
        return Atom(phi.poly + offset, phi.rel)
    if isinstance(phi, LaxAtom):
        return LaxAtom(phi.poly + offset, phi.threshold, phi.rel)
    if isinstance(phi, Not):
        return Not(shift_polys(phi.arg, offset))
    return type(phi)(tuple(shift_polys(a, offset) for a in phi.args))


def homogenize_formula(phi: Formula) -> Formula:
    """Formula over H(p): indices move up by one and (||p|| X0 > 0) is conjoined."""
    if not is_strict(phi):
        raise FormulaStageError("homogenize_formula needs a strict formula")
    shifted = shift_polys(phi, 1)
    lead = Atom(0, ">")
    if isinstance(shifted, And):
        return And(shifted.args + (lead,))
    return And(shifted, lead)


def threshold_index(kind: str, k: int, m: int) -> int:
    """0-based position in t = (e1, d1, ..., em, dm, -e1, -d1, ..., -em, -dm) of block k (1-based)."""
    if not 1 <= k <= m:
        raise ValueError(f"block {k} outside 1..{m}")
    base = {"eps": 2 * k - 2, "delta": 2 * k - 1, "-eps": 2 * m + 2 * k - 2, "-delta": 2 * m + 2 * k - 1}
    return base[kind]


def gv_block(phi: Formula, k: int, m: int) -> Formula:
    """Lax formula over (f, t) of the k-th Gabrielov-Vorobjov block."""

    def walk(node):
        if isinstance(node, Atom):
            i = node.poly
            if node.rel == "=":
                return And(LaxAtom(i, threshold_index("eps", k, m), "<="),
                           LaxAtom(i, threshold_index("-eps", k, m), ">="))
            if node.rel == ">":
                return LaxAtom(i, threshold_index("delta", k, m), ">=")
            if node.rel == "<":
                return LaxAtom(i, threshold_index("-delta", k, m), "<=")
            raise FormulaStageError(f"non-strict atom {node}")
        if isinstance(node, (Not, LaxAtom)):
            raise FormulaStageError("gv_rewrite needs a strict formula")
        return type(node)(tuple(walk(a) for a in node.args))

    return walk(phi)


def gv_rewrite(phi: Formula, m) -> Formula:
    """Union over m blocks; the result describes the GV approximation as a lax formula.

    m is the block count or anything carrying one (a Schedule).
    """
    m = getattr(m, "m", m)
    if not is_strict(phi):
        raise FormulaStageError("gv_rewrite needs a strict formula")
    if m < 1:
        raise ValueError("need at least one block")
    blocks = tuple(gv_block(phi, k, m) for k in range(1, m + 1))
    return blocks[0] if m == 1 else Or(blocks)


def threshold_vector(eps, delta) -> np.ndarray:
    """t = (e1, d1, ..., em, dm, -e1, -d1, ..., -em, -dm) for arbitrary block parameters."""
    eps = np.asarray(eps, dtype=float)
    delta = np.asarray(delta, dtype=float)
    pos = np.empty(2 * len(eps))
    pos[0::2] = eps
    pos[1::2] = delta
    return np.concatenate([pos, -pos])


# -- evaluation ------------------------------------------------------------------


def _not(v):
    if isinstance(v, (bool, np.bool_)):
        return not v
    return np.logical_not(v)


def eval_formula(phi: Formula, truth: Mapping | Callable) -> Any:
    """Evaluate with atom values looked up in ``truth`` (a mapping or a callable).

    Atom values may be booleans or numpy boolean arrays (vectorized evaluation).
    """
    lookup = truth if callable(truth) and not isinstance(truth, Mapping) else None

    def walk(node):
        if isinstance(node, (Atom, LaxAtom)):
            if lookup is not None:
                return lookup(node)
            try:
                return truth[node]
            except KeyError:
                raise UnassignedAtom(node) from None
        if isinstance(node, Not):
            return _not(walk(node.arg))
        vals = [walk(a) for a in node.args]
        op = operator.and_ if isinstance(node, And) else operator.or_
        return reduce(op, vals)

    return walk(phi)


def relation_holds(rel: str, value, rhs=0.0):
    if rel == "<":
        return value < rhs
    if rel == "<=":
        return value <= rhs
    if rel == "=":
        return value == rhs
    if rel == ">=":
        return value >= rhs
    return value > rhs


def eval_signs(phi: Formula, signs) -> bool:
    """Truth of a formula over p when sgn(p_i) = signs[i]."""
    return eval_formula(phi, lambda a: relation_holds(a.rel, signs[a.poly]))


# -- DNF and saturation --------------------------------------------------------


def dnf_clauses(phi: Formula) -> list[tuple[Atom, ...]]:
    """Clauses of a disjunctive normal form of a monotone formula (exponential size)."""
    if isinstance(phi, (Atom, LaxAtom)):
        return [(phi,)]
    if isinstance(phi, Not):
        raise FormulaStageError("DNF expansion needs a negation-free formula")
    parts = [dnf_clauses(a) for a in phi.args]
    if isinstance(phi, Or):
        return [c for p in parts for c in p]
    return [tuple(itertools.chain.from_iterable(combo)) for combo in itertools.product(*parts)]


_REL_SIGNS = {"<": {-1}, "=": {0}, ">": {1}, "<=": {-1, 0}, ">=": {0, 1}}


@dataclass(frozen=True)
class SaturatedFormula:
    signs: tuple[int, ...]

    def formula(self) -> Formula:
        rel = {-1: "<", 0: "=", 1: ">"}
        return And(tuple(Atom(i, rel[s]) for i, s in enumerate(self.signs)))


def saturate(phi: Formula, q: int | None = None) -> set[SaturatedFormula]:
    """Split phi into purely conjunctive strict formulas mentioning every polynomial."""
    if not is_monotone(phi):
        raise FormulaStageError("saturate needs a negation-free formula")
    if q is None:
        q = max_poly_index(phi) + 1
    out = set()
    for clause in dnf_clauses(phi):
        allowed = [{-1, 0, 1} for _ in range(q)]
        for a in clause:
            allowed[a.poly] &= _REL_SIGNS[a.rel]
        if any(not s for s in allowed):
            continue
        for signs in itertools.product(*(sorted(s) for s in allowed)):
            out.add(SaturatedFormula(signs))
    return out


def sign_vectors(q: int) -> Iterable[tuple[int, ...]]:
    return itertools.product((-1, 0, 1), repeat=q)


# -- JSON ------------------------------------------------------------------------


def to_json(phi: Formula) -> dict:
    if isinstance(phi, Atom):
        return {"atom": {"poly": phi.poly, "rel": phi.rel}}
    if isinstance(phi, LaxAtom):
        return {"lax": {"poly": phi.poly, "threshold": phi.threshold, "rel": phi.rel}}
    if isinstance(phi, Not):
        return {"op": "not", "args": [to_json(phi.arg)]}
    return {"op": "and" if isinstance(phi, And) else "or", "args": [to_json(a) for a in phi.args]}


def from_json(obj: dict) -> Formula:
    if "atom" in obj:
        return Atom(int(obj["atom"]["poly"]), obj["atom"]["rel"])
    if "lax" in obj:
        a = obj["lax"]
        return LaxAtom(int(a["poly"]), int(a["threshold"]), a["rel"])
    op = obj.get("op")
    args = [from_json(a) for a in obj.get("args", [])]
    if op == "not":
        if len(args) != 1:
            raise ValueError("'not' takes exactly one argument")
        return Not(args[0])
    if op == "and":
        return And(args)
    if op == "or":
        return Or(args)
    raise ValueError(f"malformed formula node: {obj!r}")
