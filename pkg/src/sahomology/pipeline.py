"""End-to-end homology of a semialgebraic set W(p, Psi) in R^n.

Stages: normalize Psi to a strict formula, homogenize onto S^n, estimate the
condition number, pick the schedule (thresholds, grid level, Cech radius),
rewrite into a lax formula over thresholds, sample atomic clouds on the grid,
combine their truncated Cech complexes, and take integer homology.

Certified mode uses the schedule exactly as derived from K; heuristic mode
lets the caller substitute K, the grid level, the Cech radius and m, and
otherwise runs the very same stages.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any

from .complex import SimplicialComplex, combine
from .condition import estimate_kappa
from .errors import IllConditioned, ResourceExceeded
from .formula import (Formula, atoms, eliminate_lax, eliminate_negations, from_json, gv_rewrite,
                      homogenize_formula, max_poly_index, threshold_vector, to_json)
from .grid import DEFAULT_BUDGET, build_grid, grid_size
from .homology import HomologySummary, homology_groups
from .poly import Polynomial, PolyTuple, homogenize_tuple
from .sampling import PointCloud, sample_atomic_clouds

DEFAULT_SIMPLEX_BUDGET = 5_000_000


@dataclass(frozen=True)
class Schedule:
    m: int
    D: int
    K: float
    eps: tuple[float, ...]
    delta: tuple[float, ...]
    level: int
    cech_radius: float

    @property
    def e(self) -> int:
        return 4 * self.m

    @property
    def t(self) -> tuple[float, ...]:
        return tuple(float(v) for v in threshold_vector(self.eps, self.delta))

    @property
    def separation(self) -> float:
        return 1.0 / (15 * (2 * self.m + 1) * self.D ** 2 * self.K ** 2)

    def is_valid(self) -> bool:
        """sqrt(2) delta_m K / 0.99 < 1 and the block parameters strictly increase."""
        seq = [v for pair in zip(self.eps, self.delta) for v in pair]
        increasing = all(a < b for a, b in zip(seq, seq[1:])) and seq[0] > 0
        return increasing and math.sqrt(2) * self.delta[-1] * self.K / 0.99 < 1

    def to_json(self) -> dict:
        return {"m": self.m, "D": self.D, "K": self.K, "eps": list(self.eps), "delta": list(self.delta),
                "t": list(self.t), "separation": self.separation, "level": self.level,
                "cech_radius": self.cech_radius}


def grid_level_for(m: int, D: int, K: float) -> int:
    """Smallest l with 2^l >= 1638 (2m+1) D^3 K^3."""
    target = 1638 * (2 * m + 1) * D ** 3 * K ** 3
    level = max(0, math.ceil(math.log2(target)))
    while level > 0 and 2.0 ** (level - 1) >= target:
        level -= 1
    while 2.0 ** level < target:
        level += 1
    return level


def make_schedule(n: int, D: int, K: float, m: int | None = None, *, strict: bool = True) -> Schedule:
    """Quantitative parameters for a tuple of max degree D on S^n with condition estimate K.

    m defaults to n + 2. With strict=False (heuristic runs) any K > 0 is accepted.
    """
    if D < 1:
        raise ValueError("D must be >= 1")
    if strict and K < 1:
        raise ValueError("K must be >= 1")
    if K <= 0 or not math.isfinite(K):
        raise ValueError("K must be positive and finite")
    m = n + 2 if m is None else m
    if m < 1:
        raise ValueError("m must be >= 1")
    if isinstance(K, int) or float(K).is_integer():
        # exact rationals, rounded once
        unit = Fraction(1, 15 * (2 * m + 1) * D ** 2 * int(K) ** 2)
        eps = tuple(float((2 * k - 1) * unit) for k in range(1, m + 1))
        delta = tuple(float(2 * k * unit) for k in range(1, m + 1))
    else:
        base = 15 * (2 * m + 1) * D ** 2 * K ** 2
        eps = tuple((2 * k - 1) / base for k in range(1, m + 1))
        delta = tuple(2 * k / base for k in range(1, m + 1))
    cech = 1.0 / (181 * (2 * m + 1) * D ** 2.5 * K ** 2)
    return Schedule(m=m, D=D, K=float(K), eps=eps, delta=delta, level=grid_level_for(m, D, K), cech_radius=cech)


@dataclass(frozen=True)
class RunConfig:
    """Run parameters. kappa/grid_level/epsilon/m are honored only in heuristic mode."""

    mode: str = "certified"
    kappa: float | None = None
    grid_level: int | None = None
    epsilon: float | None = None
    m: int | None = None
    max_kappa: float = 1e6
    budget: int | None = DEFAULT_BUDGET
    simplex_budget: int | None = DEFAULT_SIMPLEX_BUDGET
    max_dim: int | None = None
    meb_tolerance: float = 0.0
    torsion: bool = True

    def __post_init__(self):
        if self.mode not in ("certified", "heuristic"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.meb_tolerance < 0:
            raise ValueError("meb_tolerance must be >= 0")

    @property
    def overrides(self) -> dict[str, Any]:
        return {k: v for k, v in (("kappa", self.kappa), ("grid_level", self.grid_level),
                                  ("epsilon", self.epsilon), ("m", self.m)) if v is not None}


@dataclass
class RunResult:
    homology: HomologySummary
    mode: str
    K: float
    schedule: Schedule
    grid_points: int
    cloud_sizes: dict[tuple[int, int, str], int]
    simplex_counts: list[int]
    vertex_count: int
    ignored_overrides: dict[str, Any] = field(default_factory=dict)
    timings: dict[str, float] = field(default_factory=dict)
    complex: SimplicialComplex | None = field(default=None, repr=False)
    clouds: dict[tuple[int, int, str], PointCloud] | None = field(default=None, repr=False)

    @property
    def betti(self) -> tuple[int, ...]:
        return self.homology.betti

    def to_json(self) -> dict:
        out = self.homology.to_json()
        out["condition"] = self.K
        out["parameters"] = {
            "m": self.schedule.m,
            "level": self.schedule.level,
            "epsilon": self.schedule.cech_radius,
            "grid_points": self.grid_points,
            "simplices": self.simplex_counts,
            "vertices": self.vertex_count,
            "t": list(self.schedule.t),
            "cloud_sizes": {f"{i},{j},{a}": c for (i, j, a), c in sorted(self.cloud_sizes.items())},
        }
        out["mode"] = self.mode
        if self.ignored_overrides:
            out["ignored_overrides"] = self.ignored_overrides
        out["timings"] = self.timings
        return out


@dataclass(frozen=True)
class Plan:
    """Everything fixed before sampling: the homogenized problem and its schedule."""

    f: PolyTuple
    phi: Formula
    phi_bar: Formula
    K: float
    schedule: Schedule
    n: int
    ignored_overrides: dict


def prepare(p: PolyTuple, psi: Formula, config: RunConfig) -> Plan:
    if all(q.is_zero for q in p.polys):
        raise ValueError("zero polynomial tuple")
    if max_poly_index(psi) >= p.q:
        raise ValueError(f"formula refers to polynomial {max_poly_index(psi)} but only {p.q} are given")
    strict = eliminate_lax(eliminate_negations(psi))
    f = homogenize_tuple(p)
    phi = homogenize_formula(strict)
    n = p.num_vars
    heuristic = config.mode == "heuristic"
    ignored = {} if heuristic else config.overrides
    if heuristic and config.kappa is not None:
        K = float(config.kappa)
    else:
        K = estimate_kappa(f, cap=config.max_kappa).K
    sched = make_schedule(n, f.D, K, config.m if heuristic else None, strict=not heuristic)
    if heuristic:
        if config.grid_level is not None:
            sched = replace(sched, level=int(config.grid_level))
        if config.epsilon is not None:
            sched = replace(sched, cech_radius=float(config.epsilon))
    phi_bar = gv_rewrite(phi, sched.m)
    return Plan(f=f, phi=phi, phi_bar=phi_bar, K=K, schedule=sched, n=n, ignored_overrides=ignored)


def execute(plan: Plan, config: RunConfig, keep: bool = False) -> RunResult:
    sched = plan.schedule
    n = plan.n
    timings = {}
    needed = grid_size(n, sched.level)
    if config.budget is not None and needed > config.budget:
        raise ResourceExceeded(
            f"grid level {sched.level} on S^{n} needs {needed} points (budget {config.budget})",
            required_level=sched.level, required_points=needed)
    t0 = time.perf_counter()
    grid = build_grid(n, sched.level, budget=config.budget)
    timings["grid"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    keys = sorted({(a.poly, a.threshold, a.rel) for a in atoms(plan.phi_bar)})
    clouds = sample_atomic_clouds(plan.f, sched.t, grid, needed=keys)
    timings["sampling"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    eps = sched.cech_radius + config.meb_tolerance
    C = combine(plan.phi_bar, clouds, eps, n + 2, budget=config.simplex_budget)
    timings["complex"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    max_dim = n if config.max_dim is None else config.max_dim
    H = homology_groups(C, max_dim, torsion=config.torsion)
    timings["homology"] = time.perf_counter() - t0
    return RunResult(homology=H, mode=config.mode, K=plan.K, schedule=sched, grid_points=len(grid),
                     cloud_sizes={k: len(c) for k, c in clouds.items()}, simplex_counts=C.counts(),
                     vertex_count=C.count(0), ignored_overrides=plan.ignored_overrides, timings=timings,
                     complex=C if keep else None, clouds=clouds if keep else None)


def homology_semialgebraic(p: PolyTuple, psi: Formula, config: RunConfig = RunConfig(),
                           keep: bool = False) -> RunResult:
    """Homology of W(p, Psi) = {x in R^n : Psi(p(x))} up to dimension n, plus diagnostics.

    Raises IllConditioned when the condition estimate exceeds config.max_kappa and
    ResourceExceeded when the grid or complex outgrows the budgets.
    """
    return execute(prepare(p, psi, config), config, keep=keep)


# -- file formats ----------------------------------------------------------------


def poly_to_json(p: Polynomial) -> dict:
    return {"degree": p.degree,
            "terms": [{"coeff": float(c), "exponents": list(e)} for e, c in p.terms]}


def poly_from_json(obj: dict, n: int) -> Polynomial:
    terms = [(tuple(int(v) for v in t["exponents"]), float(t["coeff"])) for t in obj["terms"]]
    for e, _ in terms:
        if len(e) != n:
            raise ValueError(f"exponent {e} does not have {n} entries")
    degree = obj.get("degree")
    if degree is None:
        degree = max((sum(e) for e, _ in terms), default=0)
    return Polynomial.from_terms(n, terms, degree=int(degree))


def load_input(obj_or_path) -> tuple[PolyTuple, Formula]:
    if isinstance(obj_or_path, dict):
        obj = obj_or_path
    else:
        with open(obj_or_path) as fh:
            obj = json.load(fh)
    n = int(obj["n"])
    p = PolyTuple(tuple(poly_from_json(q, n) for q in obj["polynomials"]))
    return p, from_json(obj["formula"])


def dump_input(p: PolyTuple, psi: Formula) -> dict:
    return {"n": p.num_vars, "polynomials": [poly_to_json(q) for q in p.polys], "formula": to_json(psi)}


def ill_conditioned_json(exc: IllConditioned, mode: str) -> dict:
    return {"betti": None, "torsion": None, "condition": "ill-conditioned",
            "parameters": {"cap": exc.cap, "observed": exc.lower_bound, "level": exc.level}, "mode": mode}


def resource_json(exc: ResourceExceeded, mode: str, K: float | None = None) -> dict:
    return {"betti": None, "torsion": None, "condition": K, "mode": mode, "error": str(exc),
            "parameters": {"required_level": exc.required_level, "required_points": exc.required_points}}


__all__ = ["Schedule", "make_schedule", "grid_level_for", "RunConfig", "RunResult", "Plan", "prepare",
           "execute", "homology_semialgebraic", "load_input", "dump_input", "poly_to_json", "poly_from_json",
           "ill_conditioned_json", "resource_json"]
