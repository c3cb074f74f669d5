"""Command line entry point: ``homology INPUT [options]``."""
from __future__ import annotations

import argparse
import json
import sys

from .errors import IllConditioned, ResourceExceeded
from .grid import DEFAULT_BUDGET
from .pipeline import (RunConfig, execute, ill_conditioned_json, load_input, prepare, resource_json)
from .sampling import export_clouds_csv


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="homology", description="Homology of a semialgebraic set given by a JSON file.")
    ap.add_argument("input", help="input JSON: {n, polynomials, formula}")
    ap.add_argument("--mode", choices=("certified", "heuristic"), default="certified")
    ap.add_argument("--kappa", type=float, help="condition estimate K to use (heuristic mode)")
    ap.add_argument("--grid-level", type=int, help="grid level l (heuristic mode)")
    ap.add_argument("--epsilon", type=float, help="Cech radius (heuristic mode)")
    ap.add_argument("--m", type=int, help="number of Gabrielov-Vorobjov blocks (heuristic mode)")
    ap.add_argument("--max-kappa", type=float, default=1e6, help="give up as ill-conditioned above this K")
    ap.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="maximum number of grid points")
    ap.add_argument("--simplex-budget", type=int, default=None, help="maximum number of simplices")
    ap.add_argument("--max-dim", type=int, help="highest homology dimension reported (default n)")
    ap.add_argument("--meb-tolerance", type=float, default=0.0, help="widen the Cech inclusion test (diagnostics)")
    ap.add_argument("--no-torsion", action="store_true", help="Betti numbers only (mod-p ranks)")
    ap.add_argument("--export-cloud", metavar="PATH", help="write the atomic point clouds as CSV")
    ap.add_argument("--export-complex", metavar="PATH", help="write the complex, one simplex per line")
    ap.add_argument("--json", action="store_true", help="print the result as JSON")
    return ap


def _report(out: dict, as_json: bool) -> None:
    if as_json:
        print(json.dumps(out, indent=2))
        return
    if out.get("condition") == "ill-conditioned":
        params = out["parameters"]
        print(f"ill-conditioned: condition estimate above {params['cap']:g} (observed {params['observed']:g})")
        return
    if out.get("betti") is None:
        print(f"resource limit: {out['error']}")
        return
    print(f"mode       {out['mode']}")
    print(f"condition  K = {out['condition']:.6g}")
    params = out["parameters"]
    print(f"schedule   m = {params['m']}, level = {params['level']}, epsilon = {params['epsilon']:.6g}")
    print(f"grid       {params['grid_points']} points")
    print(f"complex    {params['simplices']} simplices by dimension")
    print(f"betti      {tuple(out['betti'])}")
    print(f"torsion    {[tuple(t) for t in out['torsion']]}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = RunConfig(mode=args.mode, kappa=args.kappa, grid_level=args.grid_level, epsilon=args.epsilon, m=args.m,
                    max_kappa=args.max_kappa, budget=args.budget, max_dim=args.max_dim,
                    meb_tolerance=args.meb_tolerance, torsion=not args.no_torsion,
                    **({"simplex_budget": args.simplex_budget} if args.simplex_budget else {}))
    p, psi = load_input(args.input)
    try:
        plan = prepare(p, psi, cfg)
    except IllConditioned as exc:
        _report(ill_conditioned_json(exc, cfg.mode), args.json)
        return 2
    if plan.ignored_overrides:
        print(f"note: {sorted(plan.ignored_overrides)} ignored in certified mode", file=sys.stderr)
    keep = bool(args.export_cloud or args.export_complex)
    try:
        result = execute(plan, cfg, keep=keep)
    except ResourceExceeded as exc:
        _report(resource_json(exc, cfg.mode, plan.K), args.json)
        return 3
    if args.export_cloud:
        export_clouds_csv(args.export_cloud, result.clouds)
    if args.export_complex:
        with open(args.export_complex, "w") as fh:
            fh.write(result.complex.to_text())
    _report(result.to_json(), args.json)
    return 0


if __name__ == "__main__":
    sys.exit(main())
