"""Rewrite the committed golden files under tests/golden from the CLI."""

import json
import sys
from pathlib import Path

from rchull.cli import main

GOLDEN = Path(__file__).resolve().parent.parent / "tests" / "golden"

PINWHEEL = [["3", "1"], ["1", "-3"], ["-3", "-1"], ["-1", "3"], ["2", "2"]]
LIFTED = [["3", "1", "0"], ["1", "-3", "0"], ["-3", "-1", "-1"], ["-1", "3", "0"], ["2", "2", "2"]]


def run(*argv):
    code = main(list(argv))
    if code != 0:
        sys.exit(f"rchull {' '.join(argv)} exited with {code}")


def write_input(name, doc):
    path = GOLDEN / name
    path.write_text(json.dumps(doc, indent=2) + "\n")
    return str(path)


if __name__ == "__main__":
    GOLDEN.mkdir(parents=True, exist_ok=True)
    pinwheel = write_input("pinwheel_points.json", {"points": PINWHEEL})
    lifted = write_input("lifted_points.json", {"points": LIFTED})
    run("hull2d", "--input", pinwheel, "--output", str(GOLDEN / "axis_hull.json"), "--svg", str(GOLDEN / "axis_hull.svg"))
    run("hull2d", "--input", pinwheel, "--cone", "1,0;0,1;3,2", "--output", str(GOLDEN / "cone_hull.json"),
        "--svg", str(GOLDEN / "cone_hull.svg"))
    run("hull-tri", "--input", lifted, "--output", str(GOLDEN / "lifted_description.json"))
