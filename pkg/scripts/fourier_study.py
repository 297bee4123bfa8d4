"""Transform tables: closed form against quadrature, and the Coulomb limit.

Writes ``ft_table.csv`` (damped, k = -1), ``ft_undamped.csv`` and
``coulomb_limit.csv`` into ``--outdir``.
"""
import argparse
from pathlib import Path

from softcoul.cli import main


def cli(argv: list) -> None:
    code = main(argv)
    if code:
        raise SystemExit(code)


def run(outdir: Path, jobs: int) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    common = ["--jobs", str(jobs)]
    cli(["ft-table", "--C", "0.1,0.5,1,2", "--xi", "0.1:10:log25", "--k", "-1", "--out", str(outdir / "ft_table.csv")] + common)
    cli(["ft-table", "--C", "1", "--xi", "0.1:10:log25", "--method", "closed", "--out", str(outdir / "ft_undamped.csv")] + common)
    cli(["coulomb-limit", "--C", "0.1,0.03,0.01,0.003,0.001,0", "--xi", "1", "--out", str(outdir / "coulomb_limit.csv")])


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    ap.add_argument("--jobs", type=int, default=1)
    a = ap.parse_args()
    run(a.outdir, a.jobs)
