"""Time the Cython and pure-Python fast-marching kernels on the bump slowness field.

    python benchmarks/bench_fmm.py --sizes 64 128 256 --repeat 3
"""

import argparse
import time

import numpy as np

from sfsbc.eikonal import fmm_distance, kernels, slowness_from_image
from sfsbc.forward import make_surface, render_lambertian
from sfsbc.grid import GridSpec


def best_time(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    ks = kernels()
    names = sorted(ks)
    print(f"{'size':>6} " + " ".join(f"{n + ' [s]':>12}" for n in names) + ("     speedup" if len(ks) > 1 else ""))
    for n in args.sizes:
        grid = GridSpec(n, n)
        s = slowness_from_image(render_lambertian(make_surface("bump", [1.0], grid)))
        src = grid.nearest_pixel(1 / np.sqrt(2), 0.0)
        results = {name: best_time(lambda k=ks[name]: fmm_distance(s, src, march=k), args.repeat) for name in names}
        row = f"{n:>6} " + " ".join(f"{results[name][0]:>12.4f}" for name in names)
        if len(ks) > 1:
            same = np.array_equal(results["cython"][1].d, results["python"][1].d)
            row += f"  {results['python'][0] / results['cython'][0]:>9.1f}x" + ("" if same else "  (outputs differ!)")
        print(row)
    if len(ks) == 1:
        print("extension not built: only the pure-Python kernel is available")


if __name__ == "__main__":
    main()
