"""Fiber-size histograms of the cover scan over a table of spectra.

    python3 scripts/cover_scan_table.py --samples 5000
"""

import argparse
from dataclasses import dataclass

from reflecta.quadric import Ellipsoid, spectrum_partition
from reflecta.section import cover_scan


@dataclass
class TableConfig:
    samples: int = 2000
    seed: int = 0
    tol: float = 1e-6


SPECTRA = {
    "R^3, k=2": [1.0, 1.0, 0.25],
    "R^3, k=3": [1.0, 0.25, 1 / 9],
    "R^4, k=3": [1.0, 1.0, 0.25, 1 / 9],
    "R^5, k=4": [1.0, 1.0, 0.25, 1 / 9, 1 / 16],
    "R^6, k=3": [1.0, 1.0, 0.25, 0.25, 1 / 9, 1 / 9],
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=TableConfig.samples)
    parser.add_argument("--seed", type=int, default=TableConfig.seed)
    cfg = TableConfig(**vars(parser.parse_args()))
    print(f"{'case':<10} {'k':>2} {'accepted':>9} {'rejected':>9}  histogram")
    for name, diag in SPECTRA.items():
        E = Ellipsoid.diagonal(diag)
        rep = cover_scan(E, cfg.samples, tol=cfg.tol, seed=cfg.seed)
        k = spectrum_partition(E).k
        hist = dict(sorted(rep.histogram.items()))
        print(f"{name:<10} {k:>2} {rep.accepted:>9} {rep.rejected_nongeneric:>9}  {hist}")


if __name__ == "__main__":
    main()
