"""Homology of semialgebraic sets from sign conditions via sampled Cech complexes."""
from .errors import IllConditioned, ResourceExceeded
from .formula import And, Atom, LaxAtom, Not, Or
from .homology import HomologySummary, homology_groups
from .pipeline import RunConfig, Schedule, homology_semialgebraic, load_input, make_schedule
from .poly import Polynomial, PolyTuple, homogenize_tuple, weyl_norm

__all__ = [
    "And", "Atom", "HomologySummary", "IllConditioned", "LaxAtom", "Not", "Or", "Polynomial", "PolyTuple",
    "ResourceExceeded", "RunConfig", "Schedule", "homogenize_tuple", "homology_groups", "homology_semialgebraic",
    "load_input", "make_schedule", "weyl_norm",
]
