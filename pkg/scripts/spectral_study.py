"""Radial spectra: C -> 0 eigenvalue scan, complex scaling, dilatation checks."""
import argparse
from pathlib import Path

from softcoul.cli import main


def cli(argv: list) -> None:
    code = main(argv)
    if code:
        raise SystemExit(code)


def run(outdir: Path, jobs: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    j = ["--jobs", str(jobs)]
    for ell in (0, 1):
        cli(["eig-scan", "--C", "0.1,0.01,0.001", "--ell", str(ell), "--count", "3", "--out", str(outdir / f"eig_scan_l{ell}.csv")] + j)
    cli(["complex-scaling", "--C", "0,1", "--theta", "0.2,0.3,0.4", "--out", str(outdir / "complex_scaling.csv")] + j)
    cli(["dilatation-check", "--out", str(outdir / "dilatation.csv")] + j)


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()
    run(a.outdir, a.jobs)
