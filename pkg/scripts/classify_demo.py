"""Classify a few bodies by the shape of their set of reflection directions.

    python3 scripts/classify_demo.py
"""

import argparse
import json

from reflecta.bodies import ellipsoid_body, perturbed_body, revolution_body
from reflecta.body import ClassifyConfig, classify_body
from reflecta.quadric import Ellipsoid


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--evidence", action="store_true", help="print the full evidence record")
    args = parser.parse_args()
    bodies = [
        ellipsoid_body(Ellipsoid.from_axes([0.8, 1.2, 1.9])),
        revolution_body([(-1.0, 0.0), (-0.6, 0.8), (0.4, 1.0), (1.0, 0.3)], axis=(0.3, -0.2, 1.0)),
        perturbed_body(Ellipsoid.from_axes([1.0, 1.5, 2.0]), [[1.5, 0.3, 0.0], [-0.4, 1.2, 0.8]], 0.5),
    ]
    cfg = ClassifyConfig(seed=args.seed)
    for K in bodies:
        c = classify_body(K, cfg)
        print(f"{K.label:<12} {c.verdict:<11} margin {c.margin:.3g}")
        if args.evidence:
            print(json.dumps(c.evidence, indent=2, default=str))


if __name__ == "__main__":
    main()
