"""Hydrogen ground state driven by a softened nucleus on x(t) = (sin t, 0, 0).

Uses ``configs/run.json``; the trajectory file is regenerated so the knots
match the run length.
"""
import argparse
import json
import math
from pathlib import Path

from softcoul.cli import main as cli
from softcoul.potentials import NucleusTrajectory

HERE = Path(__file__).resolve().parent


def run(outdir: Path, config: Path) -> int:
    outdir.mkdir(parents=True, exist_ok=True)
    raw = json.loads(config.read_text())
    traj = NucleusTrajectory.from_function(lambda t: (math.sin(t), 0.0, 0.0), 0.0, raw["t_final"], n_knots=201)
    traj.save(config.parent / raw["trajectory_file"])
    return cli(["propagate", "--config", str(config), "--out", str(outdir / "moving_nucleus.csv")])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--config", type=Path, default=HERE / "configs" / "run.json")
    a = ap.parse_args()
    raise SystemExit(run(a.outdir, a.config))
