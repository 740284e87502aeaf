"""Compare the compiled and pure-python kernel backends.

Usage: python benchmarks/bench_kernels.py [--faces 100352] [--rays 1000]
"""

import argparse
import time

import numpy as np

from plateforge import TriangleMesh, build_index
from plateforge._kernels import get_backend
from plateforge.spatial import BARY_EPS, DET_EPS, T_EPS, TIE_EPS


def terrain(n, half=60.0, seed=7):
    rng = np.random.default_rng(seed)
    xs = np.linspace(-half, half, n)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    gz = 2.0 * np.sin(0.11 * gx) + 1.5 * np.cos(0.13 * gy) + rng.normal(0, 0.05, gx.shape)
    verts = np.column_stack([gx.ravel(), gy.ravel(), gz.ravel()])
    faces = []
    for i in range(n - 1):
        for j in range(n - 1):
            a, b = i * n + j, (i + 1) * n + j
            c, d = (i + 1) * n + j + 1, i * n + j + 1
            faces.append([a, b, c])
            faces.append([a, c, d])
    return TriangleMesh(verts, np.array(faces))


def timed(fn, repeats=3):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--faces", type=int, default=100_352, help="approximate face count")
    parser.add_argument("--rays", type=int, default=1000)
    parser.add_argument("--pairs", type=int, default=200_000)
    args = parser.parse_args()

    n = int(np.sqrt(args.faces / 2)) + 1
    mesh = terrain(n)
    index = build_index(mesh)
    tree = index._tree_args()
    print(f"mesh: {mesh.n_faces} faces, index: {index.n_nodes} nodes")

    rng = np.random.default_rng(42)
    origins = np.column_stack(
        [rng.uniform(-55, 55, args.rays), rng.uniform(-55, 55, args.rays), rng.uniform(15, 40, args.rays)]
    )
    dirs = rng.normal(size=(args.rays, 3)) * 0.3
    dirs[:, 2] = -1.0
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    points = np.column_stack(
        [rng.uniform(-55, 55, args.rays), rng.uniform(-55, 55, args.rays), rng.uniform(-10, 10, args.rays)]
    )

    tri = rng.uniform(-1, 1, size=(args.pairs, 3, 3))
    po = rng.uniform(-2, 2, size=(args.pairs, 3))
    pd = rng.normal(size=(args.pairs, 3))
    pd /= np.linalg.norm(pd, axis=1, keepdims=True)

    backends = ["compiled", "python"]
    rows = []
    for name in backends:
        try:
            kern = get_backend(name)
        except ImportError:
            print(f"backend {name}: unavailable")
            continue
        t_pairs = timed(
            lambda: kern.mt_pairs(po, pd, tri[:, 0], tri[:, 1], tri[:, 2], T_EPS, BARY_EPS, DET_EPS)
        )
        t_hits = timed(
            lambda: kern.bvh_first_hit(*tree, origins, dirs, T_EPS, BARY_EPS, DET_EPS, TIE_EPS),
            repeats=3 if name == "compiled" else 1,
        )
        t_near = timed(
            lambda: kern.bvh_nearest(*tree, points, TIE_EPS),
            repeats=3 if name == "compiled" else 1,
        )
        rows.append((name, t_pairs, t_hits, t_near))
        print(
            f"{name:>9}: mt_pairs {args.pairs / t_pairs / 1e6:7.1f} M/s   "
            f"first_hit {args.rays / t_hits:9.0f} rays/s ({t_hits * 1e3:8.2f} ms)   "
            f"nearest {args.rays / t_near:9.0f} pts/s ({t_near * 1e3:8.2f} ms)"
        )

    if len(rows) == 2:
        _, cp, ch, cn = rows[0]
        _, pp, ph, pn = rows[1]
        print(
            f"\nspeedup compiled/python: mt_pairs ×{pp / cp:.1f}, "
            f"first_hit ×{ph / ch:.1f}, nearest ×{pn / cn:.1f}"
        )


if __name__ == "__main__":
    main()
