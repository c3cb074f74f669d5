"""Write the end-to-end fixtures (input JSON + expected-output JSON) into tests/fixtures/.

Heuristic parameters: K < 1 enlarges the thresholds t so that their unit
u = 1/(15(2m+1)D^2K^2) is several times the sampling tolerance sqrt(D) 2^-l
at level l = 5, while 2m u stays below the scale of the set; the Cech radius
is 0.72 of the cube-face lattice spacing 2/N (just above half its diagonal).
"""
import json
from pathlib import Path

from sahomology.formula import And, Atom, Or
from sahomology.pipeline import dump_input
from sahomology.poly import Polynomial, PolyTuple

OUT = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def poly(terms):
    return Polynomial.from_terms(2, terms)


X = poly([((1, 0), 1.0)])
Y = poly([((0, 1), 1.0)])
X_MINUS_Y = poly([((1, 0), 1.0), ((0, 1), -1.0)])
CIRCLE1 = poly([((2, 0), 1.0), ((0, 2), 1.0), ((0, 0), -1.0)])
CIRCLE2 = poly([((2, 0), 1.0), ((0, 2), 1.0), ((0, 0), -4.0)])
EPSILON = 0.0079
RESOLUTIONS = [0.05, 0.02, 0.01]

FIXTURES = {
    "two_rays": dict(
        p=PolyTuple((X_MINUS_Y, Y)),
        psi=Or(And(Atom(0, "="), Atom(1, ">")), And(Atom(1, "="), Atom(0, ">"))),
        betti=[2, 0, 0], kappa=0.35,
        note="two open half-lines from the origin"),
    "quadrant": dict(
        p=PolyTuple((X, Y)),
        psi=Or(And(Atom(0, "="), Atom(1, "=")), And(Atom(0, "="), Atom(1, ">")),
               And(Atom(0, ">"), Atom(1, "=")), And(Atom(0, ">"), Atom(1, ">"))),
        betti=[1, 0, 0], kappa=0.25,
        note="closed positive quadrant, contractible"),
    "annulus": dict(
        p=PolyTuple((CIRCLE1, CIRCLE2)),
        psi=And(Atom(0, ">"), Atom(1, "<")),
        betti=[1, 1, 0], kappa=0.3,
        note="open annulus 1 < |x| < 2"),
    "circle": dict(
        p=PolyTuple((CIRCLE1,)),
        psi=Atom(0, "="),
        betti=[1, 1, 0], kappa=0.155,
        note="unit circle"),
    "unsatisfiable": dict(
        p=PolyTuple((X,)),
        psi=And(Atom(0, ">"), Atom(0, "<")),
        betti=[0, 0, 0], kappa=0.35,
        note="x > 0 and x < 0"),
}


def main():
    OUT.mkdir(parents=True, exist_ok=True)
    for name, fx in FIXTURES.items():
        (OUT / f"{name}.json").write_text(json.dumps(dump_input(fx["p"], fx["psi"]), indent=2) + "\n")
        expected = {
            "betti": fx["betti"],
            "torsion": [[] for _ in fx["betti"]],
            "note": fx["note"],
            "heuristic": {"kappa": fx["kappa"], "grid_level": 5, "epsilon": EPSILON, "m": 4},
            "oracle": {"R": 2.5, "h": RESOLUTIONS},
        }
        (OUT / f"{name}.expected.json").write_text(json.dumps(expected, indent=2) + "\n")
        print("wrote", name)


if __name__ == "__main__":
    main()
