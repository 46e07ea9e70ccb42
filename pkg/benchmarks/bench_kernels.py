"""Compare the geometry backends on the factory scene.

Run:  python3 benchmarks/bench_kernels.py [n_receivers]

Times specular enumeration (orders 1-3, with and without blocking) over a
batch of receiver positions, checks that both backends return identical
results, and prints the speedup.
"""

from __future__ import annotations

import sys
import time

import numpy as np

from risray import kernels
from risray.scene import build_factory


def _run(backend: str, scene, tx, receivers, max_order: int,
         check_blocking: bool):
    kernels.use_backend(backend)
    t0 = time.perf_counter()
    out = [kernels.enumerate_specular(scene, tx, rx, max_order,
                                      check_blocking)
           for rx in receivers]
    return time.perf_counter() - t0, out


def main() -> None:
    n_rx = int(sys.argv[1]) if len(sys.argv) > 1 else 20
    scene = build_factory()
    tx = np.array([25.0, 6.0, 4.0])
    rng = np.random.default_rng(42)
    receivers = [np.array([rng.uniform(1, 59), rng.uniform(1, 39),
                           rng.uniform(0.2, 4.8)]) for _ in range(n_rx)]

    try:
        kernels.use_backend("cython")
    except ValueError:
        print("compiled backend not built; nothing to compare")
        return
    finally:
        kernels.use_backend(None)

    print(f"factory scene: {len(scene.surfaces)} facets, "
          f"{n_rx} receiver positions")
    print(f"{'case':<24}{'python':>10}{'cython':>10}{'speedup':>9}")
    for max_order, blocking in ((1, True), (2, True), (2, False),
                                (3, True), (3, False)):
        t_py, out_py = _run("python", scene, tx, receivers, max_order,
                            blocking)
        t_cy, out_cy = _run("cython", scene, tx, receivers, max_order,
                            blocking)
        for (o1, s1, p1), (o2, s2, p2) in zip(out_py, out_cy):
            assert np.array_equal(o1, o2)
            assert np.array_equal(s1, s2)
            assert np.array_equal(p1, p2)
        label = f"order<={max_order} block={blocking}"
        print(f"{label:<24}{t_py:>9.3f}s{t_cy:>9.3f}s{t_py / t_cy:>8.1f}x")
    kernels.use_backend(None)
    print("results identical across backends")


if __name__ == "__main__":
    main()
