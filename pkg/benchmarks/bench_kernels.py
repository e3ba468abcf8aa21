"""Time the numba kernels against their numpy twins on a level-5 graph.

    python benchmarks/bench_kernels.py [--level 5] [--repeat 3]

Both backends are called directly from ``kernels.IMPLEMENTATIONS``; run it
without ``IGS_DISABLE_NUMBA`` set, or there is nothing to compare. Results are
checked for equality before any timing is reported.
"""
import argparse
import time
import warnings

import numpy as np

from igs import kernels
from igs.lyapunov import _indices, build_random_matrix_set, crn_uniforms
from igs.system import generate, load_bundled


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def same(a, b):
    if isinstance(a, tuple):
        return all(same(x, y) for x, y in zip(a, b))
    if isinstance(a, np.ndarray) and a.dtype.kind == "f":
        return np.allclose(a, b, rtol=1e-12)
    return np.array_equal(np.asarray(a), np.asarray(b))


def cases(level):
    g = generate(load_bundled("pentagon_decagon"), level).final
    indptr, indices = g.csr
    prof = kernels._np_ball_profile(indptr, indices, 8)
    ms = build_random_matrix_set(load_bundled("random_two_color"))
    idx = _indices(ms, crn_uniforms(100, 5000, seed=0))
    x0 = np.ones(ms.dim)
    src = np.arange(0, g.num_nodes, max(1, g.num_nodes // 200), dtype=np.int64)
    return g, {
        "bfs": (indptr, indices, 0),
        "eccentricities": (indptr, indices, src),
        "ball_profile": (indptr, indices, 8),
        "vgbc": (indptr, indices, 4, prof[:, 4].astype(np.int64)),
        "lyapunov_sums": (ms.stacked().astype(np.float64), idx.astype(np.int64), x0, 100),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--level", type=int, default=5)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    warnings.simplefilter("ignore", RuntimeWarning)

    if "numba" not in kernels.IMPLEMENTATIONS:
        print("numba unavailable; nothing to compare")
        return
    g, work = cases(args.level)
    print(f"graph: |V| = {g.num_nodes}, |E| = {g.num_arcs}")
    print(f"{'kernel':<16}{'numpy s':>10}{'numba s':>10}{'speedup':>9}")
    for name, call in work.items():
        nb = kernels.IMPLEMENTATIONS["numba"][name]
        nb(*call)  # compile outside the timed region
        t_nb, r_nb = best_of(lambda: nb(*call), args.repeat)
        t_np, r_np = best_of(lambda: kernels.IMPLEMENTATIONS["numpy"][name](*call), args.repeat)
        if not same(r_nb, r_np):
            raise SystemExit(f"{name}: backends disagree")
        print(f"{name:<16}{t_np:>10.4f}{t_nb:>10.4f}{t_np / t_nb:>8.1f}x")


if __name__ == "__main__":
    main()
