"""Error of the truncated Dyson series against the reference propagator.

For each order J the distance to the reference state at t is compared with
the remainder bound sum_{j>J} x^j / j!, x = (t - s) / (e C).
"""
import argparse
import csv
import math
from pathlib import Path

import numpy as np

from softcoul import propagator as pr


def run(outdir: Path, n: int, t: float, C: float, J_max: int, quadrature: str) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    grid = pr.Grid3D(n, 24.0)
    psi0 = pr.make_groundstate(grid)
    traj = pr.NucleusTrajectory.from_function(lambda s: (math.sin(s), 0.0, 0.0), 0.0, t)
    cfg = pr.PropagationConfig(grid=grid, dt=0.005, C=C, trajectory=traj)
    ref = pr.Propagator(cfg).evolve(psi0, 0.0, t)
    terms = pr.dyson_terms(psi0, 0.0, t, cfg, J=J_max, quadrature=quadrature)
    partial = np.zeros_like(psi0.amplitudes)
    with open(outdir / f"dyson_{quadrature}.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["J", "error", "bound"])
        for J, q in enumerate(terms):
            partial = partial + q.amplitudes
            err = pr.WaveFunction3D(partial, grid).distance(ref)
            w.writerow([J, "%.17g" % err, "%.17g" % pr.truncation_bound(t, C, J)])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--n", type=int, default=48)
    ap.add_argument("--t", type=float, default=0.5)
    ap.add_argument("--C", type=float, default=1.0)
    ap.add_argument("--J", type=int, default=4)
    ap.add_argument("--quadrature", choices=["product", "simplex"], default="product")
    a = ap.parse_args()
    run(a.outdir, a.n, a.t, a.C, a.J, a.quadrature)
