import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_formula
from sahomology.formula import (And, Atom, FormulaStageError, LaxAtom, Not, Or, SaturatedFormula, atoms,
                                eliminate_lax, eliminate_negations, eval_formula, eval_signs, from_json,
                                gv_block, gv_rewrite, homogenize_formula, is_lax, is_monotone, is_strict,
                                saturate, sign_vectors, size, stage, threshold_vector, to_json, to_strict)
from sahomology.oracle import member_affine, member_sphere
from sahomology.pipeline import make_schedule
from sahomology.poly import Polynomial, PolyTuple, homogenize_tuple

EQ_2_1 = Or(And(Atom(0, "="), Atom(1, ">")), And(Atom(1, "="), Atom(0, ">")))


def same_truth(phi, psi, q):
    return all(eval_signs(phi, s) == eval_signs(psi, s) for s in sign_vectors(q))


def test_negation_of_atom():
    assert eliminate_negations(Not(Atom(0, ">"))) == Atom(0, "<=")


def test_negation_de_morgan():
    phi = Not(And(Atom(0, "="), Atom(1, ">")))
    out = eliminate_negations(phi)
    assert out == Or(Or(Atom(0, "<"), Atom(0, ">")), Atom(1, "<="))
    assert same_truth(phi, out, 2)


def test_negation_identity_on_monotone():
    phi = Or(And(Atom(0, "<="), Atom(1, ">")), Atom(2, "="))
    assert eliminate_negations(phi) == phi


def test_eliminate_lax_examples():
    assert eliminate_lax(Atom(0, ">=")) == Or(Atom(0, "="), Atom(0, ">"))
    assert eliminate_lax(Atom(0, "<=")) == Or(Atom(0, "="), Atom(0, "<"))
    phi = And(Atom(0, "="), Atom(1, ">"))
    assert eliminate_lax(phi) == phi


def test_eliminate_lax_needs_monotone():
    with pytest.raises(FormulaStageError):
        eliminate_lax(Not(Atom(0, ">=")))


def test_stages():
    assert stage(Not(Atom(0, ">"))) == "raw"
    assert stage(Atom(0, ">=")) == "monotone"
    assert stage(Atom(0, ">")) == "strict"
    assert stage(LaxAtom(0, 1, ">=")) == "lax"


@given(st.integers(0, 2**32 - 1), st.integers(1, 3), st.integers(1, 12))
def test_rewrites_preserve_truth(seed, q, n_atoms):
    rng = np.random.default_rng(seed)
    phi = random_formula(rng, q, n_atoms)
    mono = eliminate_negations(phi)
    strict = eliminate_lax(mono)
    assert is_monotone(mono) and is_strict(strict)
    assert same_truth(phi, mono, q) and same_truth(phi, strict, q)
    assert size(strict) <= 2 * size(phi)


def test_homogenize_formula_example():
    out = homogenize_formula(EQ_2_1)
    expected = And(Or(And(Atom(1, "="), Atom(2, ">")), And(Atom(2, "="), Atom(1, ">"))), Atom(0, ">"))
    assert out == expected
    assert homogenize_formula(Atom(0, ">")) == And(Atom(1, ">"), Atom(0, ">"))


def test_homogenize_formula_needs_strict():
    with pytest.raises(FormulaStageError):
        homogenize_formula(Atom(0, ">="))


def test_homogenization_membership_correspondence(rng):
    X = Polynomial.from_terms(2, {(1, 0): 1.0})
    Y = Polynomial.from_terms(2, {(0, 1): 1.0})
    p = PolyTuple((X - Y, Y))
    f = homogenize_tuple(p)
    phi = homogenize_formula(EQ_2_1)
    pts = np.concatenate([rng.normal(size=(1000, 2)), [[1.0, 1.0], [3.0, 0.0], [-1.0, -1.0], [0.0, 0.0]]])
    lifted = np.hstack([np.ones((len(pts), 1)), pts])
    lifted /= np.linalg.norm(lifted, axis=1, keepdims=True)
    a = member_affine(p, EQ_2_1, pts)
    b = member_sphere(f, [], phi, lifted)
    assert np.array_equal(a, b)
    assert a[-4:].tolist() == [True, True, False, False]


def test_eval_formula_basics():
    T, F = Atom(0, ">"), Atom(1, ">")
    truth = {T: True, F: False}
    assert eval_formula(And(T, T), truth) is True
    assert eval_formula(Or(F, F), truth) is False
    assert eval_formula(Not(T), truth) is False
    arr = eval_formula(Or(T, F), {T: np.array([True, False]), F: np.array([False, False])})
    assert arr.tolist() == [True, False]


def test_eval_formula_missing_atom():
    with pytest.raises(KeyError):
        eval_formula(Atom(0, ">"), {})


def test_saturate_examples():
    assert saturate(Atom(0, ">"), q=1) == {SaturatedFormula((1,))}
    assert saturate(Atom(0, ">"), q=2) == {SaturatedFormula((1, s)) for s in (-1, 0, 1)}
    assert saturate(And(Atom(0, "="), Atom(0, ">"))) == set()


@given(st.integers(0, 2**32 - 1), st.integers(1, 3))
def test_saturate_is_truth_table(seed, q):
    rng = np.random.default_rng(seed)
    phi = to_strict(random_formula(rng, q, int(rng.integers(1, 7))))
    sat = {s.signs for s in saturate(phi, q)}
    assert sat == {s for s in sign_vectors(q) if eval_signs(phi, s)}
    for s in saturate(phi, q):
        assert eval_signs(s.formula(), s.signs)


def test_gv_rewrite_examples():
    assert gv_rewrite(Atom(0, "="), 1) == And(LaxAtom(0, 0, "<="), LaxAtom(0, 2, ">="))
    assert gv_rewrite(Atom(0, ">"), 2) == Or(LaxAtom(0, 1, ">="), LaxAtom(0, 3, ">="))
    assert gv_rewrite(Atom(0, "<"), 2) == Or(LaxAtom(0, 5, "<="), LaxAtom(0, 7, "<="))
    assert gv_rewrite(Atom(0, ">"), make_schedule(0, 1, 1, m=2)) == gv_rewrite(Atom(0, ">"), 2)
    assert is_lax(gv_rewrite(EQ_2_1, 3))


def test_gv_rewrite_needs_strict():
    with pytest.raises(FormulaStageError):
        gv_rewrite(Atom(0, ">="), 1)


def test_threshold_vector_layout():
    t = threshold_vector([1, 3], [2, 4])
    assert t.tolist() == [1, 2, 3, 4, -1, -2, -3, -4]


def test_example_block_membership(rng):
    # one block over (X - Y, Y) read directly in the plane; ||X - Y|| = sqrt(2), ||Y|| = 1
    X = Polynomial.from_terms(2, {(1, 0): 1.0})
    Y = Polynomial.from_terms(2, {(0, 1): 1.0})
    p = PolyTuple((X - Y, Y))
    eps, delta = 0.2, 0.3
    t = threshold_vector([eps], [delta])
    block = gv_block(EQ_2_1, 1, 1)
    pts = rng.uniform(-1, 1, size=(5000, 2))
    x, y = pts.T
    s2 = math.sqrt(2)
    expected = ((np.abs(x - y) <= eps * s2) & (y >= delta)) | ((np.abs(y) <= eps) & (x - y >= delta * s2))
    assert np.array_equal(member_sphere(p, t, block, pts), expected)


def test_json_roundtrip(rng):
    for _ in range(50):
        phi = random_formula(rng, 3, int(rng.integers(1, 9)))
        assert from_json(to_json(phi)) == phi
    lax = gv_rewrite(EQ_2_1, 2)
    assert from_json(to_json(lax)) == lax


def test_from_json_rejects_malformed():
    with pytest.raises(ValueError):
        from_json({"op": "xor", "args": []})
    with pytest.raises(ValueError):
        from_json({"op": "not", "args": []})


def test_size_counts_atoms():
    assert size(EQ_2_1) == 4
    assert size(Not(Atom(0, ">"))) == 1
    assert atoms(EQ_2_1) == {Atom(0, "="), Atom(1, ">"), Atom(1, "="), Atom(0, ">")}
