"""The space of Hopf fibres is a round sphere of radius 1/2.

Points of S^3 are grouped by their Hopf fibre (great circles). Metrizing the
set of fibres by chained set distances recovers the base S^2, but at half the
unit scale: the distance between two fibres is half the angle between their
base points.

Run: python demos/hopf_leaf_space.py
"""

import numpy as np

from ghcert import leaf_space, sample_hopf


def main():
    sample = sample_hopf(fibers=300, per_fiber=40, seed=0)
    print(f"{sample.size} points on {sample.n_leaves} fibres, fill radius {sample.fill_radius:.4f}")

    chain = leaf_space(sample, "chain").space.dist
    haus = leaf_space(sample, "hausdorff").space.dist
    angle = np.arccos(np.clip(sample.base @ sample.base.T, -1.0, 1.0))
    off = ~np.eye(len(angle), dtype=bool)
    ratio = chain[off] / angle[off]

    q = np.quantile(ratio, [0.05, 0.5, 0.95])
    print(f"leaf distance / base angle: 5% {q[0]:.4f}, median {q[1]:.4f}, 95% {q[2]:.4f}")
    # fibres are parallel great circles, so the two constructions coincide
    print(f"max |hausdorff - chain| = {np.abs(haus - chain).max():.2e}")


if __name__ == "__main__":
    main()
