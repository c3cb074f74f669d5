import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from sahomology.formula import And, Atom, Not, Or
from sahomology.pipeline import load_input
from sahomology.poly import Polynomial, PolyTuple

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

FIXTURES = Path(__file__).parent / "fixtures"
FIXTURE_NAMES = ["two_rays", "quadrant", "annulus", "circle", "unsatisfiable"]


def load_fixture(name):
    p, psi = load_input(FIXTURES / f"{name}.json")
    expected = json.loads((FIXTURES / f"{name}.expected.json").read_text())
    return p, psi, expected


def random_poly(rng, n, d, nterms=4, homogeneous=False):
    terms = {}
    for _ in range(nterms):
        if homogeneous:
            alpha = tuple(rng.multinomial(d, np.ones(n) / n))
        else:
            alpha = tuple(rng.multinomial(int(rng.integers(0, d + 1)), np.ones(n) / n))
        terms[alpha] = terms.get(alpha, 0.0) + float(rng.normal())
    p = Polynomial.from_terms(n, terms, degree=d)
    if p.is_zero:
        return random_poly(rng, n, d, nterms, homogeneous)
    return p


def random_tuple(rng, n, q, D, homogeneous=False):
    return PolyTuple(tuple(random_poly(rng, n, int(rng.integers(1, D + 1)), homogeneous=homogeneous)
                           for _ in range(q)))


def random_formula(rng, q, size, relations=("<", "<=", "=", ">=", ">"), negations=True):
    """Random formula with exactly ``size`` atoms."""
    if size == 1:
        node = Atom(int(rng.integers(q)), str(rng.choice(relations)))
    else:
        left = int(rng.integers(1, size))
        kids = (random_formula(rng, q, left, relations, negations),
                random_formula(rng, q, size - left, relations, negations))
        node = And(kids) if rng.random() < 0.5 else Or(kids)
    if negations and rng.random() < 0.25:
        node = Not(node)
    return node


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# acceptance criteria record one line each; printed at the end of the run
ACCEPTANCE_LINES: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[k])
