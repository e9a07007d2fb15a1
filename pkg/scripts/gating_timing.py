"""Measure what the risk gate buys: mean per-step solve time with the
lateral risk terms gated by field overlap versus always evaluated.

Both variants produce identical trajectories (the gate only skips cost
terms that are zero anyway), so the comparison is purely about time.
"""

import argparse
from pathlib import Path

from intersection_game.runner import run, timing
from intersection_game.scenario import load_scenario

ROOT = Path(__file__).resolve().parents[1]


def mean_solve(sc, gating, repeats):
    return min(
        timing(run(sc, risk_gating=gating))["mean_solve_time"] for _ in range(repeats)
    )


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3,
                    help="timing repetitions per variant; best is kept")
    ap.add_argument("--scenarios", nargs="+", default=["case1_A", "case3"])
    args = ap.parse_args(argv)

    print(f"{'scenario':<10} {'gated (ms)':>11} {'ungated (ms)':>13} {'ratio':>7}")
    for name in args.scenarios:
        sc = load_scenario(ROOT / "scenarios" / f"{name}.cfg")
        gated = mean_solve(sc, True, args.repeats)
        ungated = mean_solve(sc, False, args.repeats)
        print(
            f"{name:<10} {1e3 * gated:>11.2f} {1e3 * ungated:>13.2f} "
            f"{gated / ungated:>7.3f}"
        )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
