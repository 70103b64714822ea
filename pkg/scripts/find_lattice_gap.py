"""Seeded search for a fiber that a lattice kernel basis fails to connect.

Draws random design matrices (rows with entries in 0..3 plus an all-ones
row) and random tables, and stops at the first fiber where the raw kernel
basis leaves the fiber disconnected while the computed Markov basis
connects it. The instance is written as JSON for the regression test.

    python scripts/find_lattice_gap.py --seed 0 --out tests/fixtures/lattice_gap.json
"""

import argparse
import json
import sys

import numpy as np

from markovbasis.basis import toric_markov_basis, verify_connects
from markovbasis.enumeration import enumerate_fiber_cells
from markovbasis.errors import EnumerationCapError
from markovbasis.intlin import lattice_kernel_basis


def search(seed: int, rows: int, cols: int, max_entry: int, designs: int, tables: int, cap: int):
    rng = np.random.default_rng(seed)
    for d in range(designs):
        A = rng.integers(0, 4, size=(rows, cols)).tolist() + [[1] * cols]
        K = lattice_kernel_basis(A)
        if not K:
            continue
        B = None
        for t in range(tables):
            u = [int(x) for x in rng.integers(0, max_entry + 1, size=cols)]
            try:
                if verify_connects(A, K, u, cap):
                    continue
            except EnumerationCapError:
                continue
            B = B or toric_markov_basis(A)
            if verify_connects(A, B, u, cap):
                return {
                    "seed": seed,
                    "design_index": d,
                    "table_index": t,
                    "design": A,
                    "table": u,
                    "kernel_basis": K,
                    "markov_basis": [list(v) for v in B.vectors()],
                    "fiber_size": len(enumerate_fiber_cells(A, u, cap)),
                }
    return None


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--rows", type=int, default=3)
    ap.add_argument("--cols", type=int, default=6)
    ap.add_argument("--max-entry", type=int, default=3)
    ap.add_argument("--designs", type=int, default=200)
    ap.add_argument("--tables", type=int, default=20)
    ap.add_argument("--cap", type=int, default=5000)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)
    found = search(args.seed, args.rows, args.cols, args.max_entry, args.designs, args.tables, args.cap)
    if found is None:
        print("no gap found", file=sys.stderr)
        return 1
    text = json.dumps(found, indent=1) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    print(
        f"design {found['design_index']} table {found['table']}: fiber of {found['fiber_size']} points, "
        f"kernel basis ({len(found['kernel_basis'])} vectors) disconnected, "
        f"Markov basis ({len(found['markov_basis'])} moves) connected"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
