"""Classify every four-genotype extremal Volterra operator, class by class.

Prints one row per equivalence class: canonical bits, class size, cycle
structure, the graph-based claim and the Cesaro diagnostic of a representative.

    python3 scripts/classify_m4.py [--starts 32] [--max-steps 1000000]
"""

import argparse
import time

from volterra_qso import DiagnosticProtocol, ExtremalVolterra, classify
from volterra_qso.tournament import cycle_structure, partition_into_classes, tournament_from_extremal
from volterra_qso.volterra import enumerate_extremal


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--starts", type=int, default=32)
    ap.add_argument("--max-steps", type=int, default=1_000_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    cps = tuple(c for c in (10_000, 30_000, 100_000, 300_000, 1_000_000) if c <= args.max_steps)
    protocol = DiagnosticProtocol(n_starts=args.starts, checkpoints=cps, seed=args.seed)
    classes = partition_into_classes(tournament_from_extremal(E) for E in enumerate_extremal(4))

    print(f"{'class':8} {'size':>4}  {'structure':16} {'graph claim':28} {'numeric':18} {'amplitude':>9} {'time':>6}")
    for cid, members in classes.items():
        E = ExtremalVolterra.from_bitstring(cid.canonical, 4)
        t0 = time.perf_counter()
        v = classify(E, protocol)
        dt = time.perf_counter() - t0
        print(
            f"{cid.canonical:8} {len(members):>4}  {cycle_structure(members[0]):16} "
            f"{v.graph_claim.value:28} {v.numeric.category.value:18} {v.numeric.amplitude:9.4f} {dt:5.1f}s"
        )


if __name__ == "__main__":
    main()
