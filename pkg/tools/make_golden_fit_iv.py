"""Record the fit-iv output on the bundled dataset as a golden file."""

import csv
import io
import json
import sys
from contextlib import redirect_stdout
from importlib import resources
from pathlib import Path

from qcrlab.cli import main

ARGS = ["fit-iv", "--noise-sigma", "0.005"]
GOLDEN = Path(__file__).resolve().parents[1] / "tests" / "golden" / "fit_iv_bundled.json"


def run():
    path = str(resources.files("qcrlab.data").joinpath("iv_synthetic.csv"))
    buf = io.StringIO()
    with redirect_stdout(buf):
        status = main([*ARGS, path])
    if status:
        sys.exit(status)
    lines = [ln for ln in buf.getvalue().splitlines() if not ln.startswith("#")]
    rows = csv.DictReader(lines)
    return {r["parameter"]: {"value": float(r["value"]), "sigma": float(r["sigma"])} for r in rows}


if __name__ == "__main__":
    GOLDEN.write_text(json.dumps({"args": ARGS, "params": run()}, indent=2) + "\n")
