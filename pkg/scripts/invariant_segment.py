"""Orbits on the segment joining the two interior face fixed points of 110111.

Both endpoints are fixed; the segment between them is invariant and every
point strictly inside it is carried to the endpoint with x3 = 0.

    python3 scripts/invariant_segment.py [--samples 100] [--steps 100000]
"""

import argparse

from volterra_qso import check_invariant_segment
from volterra_qso.catalog import HAMILTONIAN_4

THIRD = 1 / 3
A = (THIRD, 0.0, THIRD, THIRD)
B = (THIRD, THIRD, 0.0, THIRD)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=100)
    ap.add_argument("--steps", type=int, default=100_000)
    ap.add_argument("--unconstrained", action="store_true",
                    help="iterate without projecting rounding errors back onto the segment")
    args = ap.parse_args()

    rep = check_invariant_segment(
        HAMILTONIAN_4, A, B, samples=args.samples, steps=args.steps, constrained=not args.unconstrained
    )
    print(f"max distance of images from the segment: {rep.max_deviation:.2e}")
    print(f"endpoint residuals: {rep.endpoint_residuals[0]:.2e}, {rep.endpoint_residuals[1]:.2e}")
    print(f"common limit endpoint: {rep.limit_endpoint}")
    print(f"max distance to it after {args.steps} steps: {rep.max_limit_distance:.2e}")
    print(f"largest per-step projection: {rep.max_correction:.2e}")


if __name__ == "__main__":
    main()
