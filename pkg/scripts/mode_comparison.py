"""Side-by-side mode comparison on the two multi-vehicle scenarios.

Thin wrapper over the `compare` subcommand: runs the four-vehicle ramp-up
case and the eight-vehicle case under all three modes and prints the
summary tables.
"""

from pathlib import Path

from intersection_game.cli import main as cli_main

ROOT = Path(__file__).resolve().parents[1]


def main():
    rc = 0
    for name in ("case2", "case3"):
        print(f"== {name} ==")
        rc |= cli_main(["compare", str(ROOT / "scenarios" / f"{name}.cfg")])
        print()
    return rc


if __name__ == "__main__":
    raise SystemExit(main())
