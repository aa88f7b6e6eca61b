"""Write the bundled 10-dimensional synthetic stream used by the experiments.

Twelve anisotropic Gaussian clusters with integer-rounded coordinates plus
about 2% uniform background noise, shuffled into arrival order. Fully
determined by the seed.
"""
from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

DIM = 10


def make_points(n: int = 10_000, clusters: int = 12, noise: float = 0.02, seed: int = 2020) -> np.ndarray:
    rng = np.random.default_rng(seed)
    centers = rng.uniform(0, 1000, size=(clusters, DIM))
    spreads = rng.uniform(15, 80, size=(clusters, DIM))
    weights = rng.dirichlet(np.full(clusters, 2.0))
    n_noise = int(round(noise * n))
    labels = rng.choice(clusters, size=n - n_noise, p=weights)
    body = centers[labels] + rng.standard_normal((n - n_noise, DIM)) * spreads[labels]
    junk = rng.uniform(-500, 1500, size=(n_noise, DIM))
    pts = np.rint(np.vstack([body, junk]))
    return pts[rng.permutation(n)]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[1] / "data" / "synthetic10d.csv"))
    ap.add_argument("--rows", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=2020)
    args = ap.parse_args(argv)
    pts = make_points(args.rows, seed=args.seed)
    header = ",".join(f"f{i}" for i in range(DIM))
    np.savetxt(args.out, pts, fmt="%d", delimiter=",", header=header, comments="")
    print(f"wrote {len(pts)} rows to {args.out}")


if __name__ == "__main__":
    main()
