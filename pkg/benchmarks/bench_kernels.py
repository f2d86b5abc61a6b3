"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--sizes 16 64 200 400] [--repeat 3]

Prints one CSV row per (kernel, size, backend) with the best wall time and
the speedup of the compiled backend.
"""
import argparse
import time

import numpy as np

from pcc import linalg


def best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def eig_job(backend, a):
    return lambda: linalg.sym_eigendecompose(a, backend=backend)


def crc_job(kernels, data):
    return lambda: kernels.crc64(data)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[16, 64, 200, 400])
    parser.add_argument("--crc-bytes", type=int, default=1 << 20)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    try:
        compiled = linalg.load_kernels("compiled")
    except ImportError:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`")
        return 1
    python = linalg.load_kernels("python")

    print("kernel,size,backend,seconds,speedup")
    rng = np.random.default_rng(0)
    for n in args.sizes:
        b = rng.normal(size=(n, n))
        a = (b + b.T) / 2
        times = {name: best_time(eig_job(name, a), args.repeat)
                 for name in ("compiled", "python")}
        for name, t in times.items():
            speedup = times["python"] / t
            print(f"eigendecompose,{n},{name},{t:.6f},{speedup:.1f}")

    data = rng.integers(0, 256, args.crc_bytes, dtype=np.uint8).tobytes()
    times = {"compiled": best_time(crc_job(compiled, data), args.repeat),
             "python": best_time(crc_job(python, data), 1)}
    for name, t in times.items():
        print(f"crc64,{args.crc_bytes},{name},{t:.6f},{times['python'] / t:.1f}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
