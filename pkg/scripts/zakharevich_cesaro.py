"""Cesaro means of the three-genotype cyclic operator (alpha, beta, gamma) = (1, 0, 1).

The time averages drift between the vertices instead of settling, with
swings that grow as the orbit spends ever longer near each vertex. Prints the
checkpoint means of one start and the per-start amplitudes of a batch.

    python3 scripts/zakharevich_cesaro.py [--seed 0] [--starts 32]
"""

import argparse

import numpy as np

from volterra_qso import DiagnosticProtocol, cesaro_from, numeric_diagnostic, sample_interior
from volterra_qso.catalog import ZAKHAREVICH

CHECKPOINTS = (1_000, 3_000, 10_000, 30_000, 100_000, 300_000, 1_000_000)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--starts", type=int, default=32)
    args = ap.parse_args()

    x0 = sample_interior(3, args.seed)
    seq = cesaro_from(ZAKHAREVICH, x0, CHECKPOINTS)
    print("x0 =", np.array2string(x0, precision=6))
    print(f"{'n':>9}  mean")
    for n, mean in zip(seq.checkpoints, seq.means):
        print(f"{n:>9}  {np.array2string(mean, precision=6)}")
    print(f"amplitude over checkpoints: {seq.amplitude:.4f}")

    d = numeric_diagnostic(ZAKHAREVICH, DiagnosticProtocol(n_starts=args.starts, seed=args.seed))
    amps = np.asarray(d.amplitudes)
    print(
        f"\n{args.starts} starts: category={d.category.value} "
        f"oscillating={d.fraction_oscillating:.2f} "
        f"amplitude min/median/max = {amps.min():.3f}/{np.median(amps):.3f}/{amps.max():.3f}"
    )


if __name__ == "__main__":
    main()
