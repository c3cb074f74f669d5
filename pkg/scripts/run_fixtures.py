"""Run every end-to-end fixture through the pipeline (heuristic parameters from its .expected.json)."""
import json
import sys
import time
from pathlib import Path

from sahomology.pipeline import RunConfig, execute, load_input, prepare

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def main() -> int:
    bad = 0
    for exp_path in sorted(FIXTURES.glob("*.expected.json")):
        name = exp_path.name.removesuffix(".expected.json")
        expected = json.loads(exp_path.read_text())
        hp = expected["heuristic"]
        cfg = RunConfig(mode="heuristic", kappa=hp["kappa"], grid_level=hp["grid_level"],
                        epsilon=hp["epsilon"], m=hp["m"])
        p, psi = load_input(FIXTURES / f"{name}.json")
        t0 = time.perf_counter()
        result = execute(prepare(p, psi, cfg), cfg)
        ok = tuple(result.betti) == tuple(expected["betti"])
        bad += not ok
        print(f"{'ok ' if ok else 'BAD'} {name:15s} betti={tuple(result.betti)} "
              f"expected={tuple(expected['betti'])} ({time.perf_counter() - t0:.1f} s)")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
