"""Fraction of planar sections with a witnessing reflection, per body.

    python3 scripts/bezdek_survey.py --samples 100
"""

import argparse

from reflecta.bezdek import bezdek_scan
from reflecta.bodies import box_body, ellipsoid_body, perturbed_body, revolution_body, superellipsoid_body
from reflecta.quadric import Ellipsoid

BODIES = {
    "ellipsoid": lambda: ellipsoid_body(Ellipsoid.from_axes([1.0, 1.5, 2.0])),
    "revolution": lambda: revolution_body([(-1.0, 0.0), (-0.6, 0.8), (0.4, 1.0), (1.0, 0.3)]),
    "superellipsoid": lambda: superellipsoid_body([1.0, 1.3, 1.7], 3.0),
    "box": lambda: box_body([0.8, 1.3, 2.0]),
    "perturbed": lambda: perturbed_body(
        Ellipsoid.from_axes([1.0, 1.5, 2.0]), [[1.5, 0.3, 0.0], [-0.4, 1.2, 0.8], [0.2, -0.9, 1.4]], 0.4
    ),
}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--samples", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--bodies", nargs="*", default=list(BODIES))
    args = parser.parse_args()
    print(f"{'body':<15} {'planes':>6} {'bezdek':>7} {'strong':>7}")
    for name in args.bodies:
        rep = bezdek_scan(BODIES[name](), samples=args.samples, seed=args.seed)
        print(f"{name:<15} {rep.nonempty:>6} {rep.fraction_bezdek:>7.3f} {rep.fraction_strong:>7.3f}")


if __name__ == "__main__":
    main()
