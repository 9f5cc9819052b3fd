"""Track fibers around small loops and one loop that encircles the
non-generic locus of a 4-dimensional ellipsoid with a doubled eigenvalue.

    python3 scripts/monodromy_demo.py
"""

import argparse

import numpy as np

from reflecta.errors import ReflectaError
from reflecta.quadric import Ellipsoid, ProjHyperplane, spectrum_partition
from reflecta.section import chart_loop, track_fiber


def encircling_loop(steps, radius=0.3):
    # The first two coordinates span a doubled eigenspace; the loop winds around it.
    t = np.linspace(0.0, 2 * np.pi, steps + 1)
    return [ProjHyperplane.from_normal([radius * np.cos(s), radius * np.sin(s), 1.0, 1.0]) for s in t]


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--loops", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    E = Ellipsoid.diagonal([1.0, 1.0, 0.25, 1 / 9])
    P = spectrum_partition(E)
    rng = np.random.default_rng(args.seed)
    for i in range(args.loops):
        G = ProjHyperplane.from_normal(rng.standard_normal(E.n))
        try:
            res = track_fiber(E, chart_loop(G, radius=0.02, steps=48), partition=P)
            print(f"small loop {i}: permutation {res.permutation}, max jump {res.max_step_jump:.2e}")
        except ReflectaError as exc:
            print(f"small loop {i}: {type(exc).__name__}: {exc}")
    for steps in (64, 128):
        res = track_fiber(E, encircling_loop(steps), partition=P)
        print(f"encircling loop, {steps} steps: permutation {res.permutation}, halvings {res.halvings}")


if __name__ == "__main__":
    main()
