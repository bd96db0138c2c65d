"""Time the numba kernels against the numpy references.

    python3 benchmarks/bench_backends.py --side 128 --repeats 5

Both backends consume the same random inputs; the first numba call of each
kernel (compilation) is excluded.
"""
import argparse
import statistics
import time

import numpy as np

from gmrf_curvature import _backend, kernels
from gmrf_curvature.cycle import measure
from gmrf_curvature.lattice import Lattice, ModelParams, init_lattice
from gmrf_curvature.sampler import SamplerConfig, SamplerMode, SweepOrder, sweep_values


def _time(fn, repeats):
    fn()  # warm-up / compile
    out = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        out.append(time.perf_counter() - t0)
    return statistics.median(out)


def cases(side):
    base = init_lattice(side, ModelParams(0.0, 1.0, 0.0), seed=0)
    params = ModelParams(0.0, 1.0, 0.12)

    def sweep(cfg):
        lat = base.copy()
        return lambda: sweep_values(lat, params, cfg, np.random.default_rng(1))

    return {
        "gibbs raster sweep": sweep(SamplerConfig(mode=SamplerMode.GIBBS)),
        "MH raster sweep": sweep(SamplerConfig()),
        "gibbs checkerboard sweep": sweep(SamplerConfig(mode=SamplerMode.GIBBS,
                                                        sweep_order=SweepOrder.CHECKERBOARD)),
        "measure (covariance + forms)": lambda: measure(Lattice(base.values), 0.12),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--side", type=int, default=128)
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    backends = ["numpy"] + (["numba"] if _backend.HAVE_NUMBA else [])
    results = {}
    for name in backends:
        _backend.BACKEND = name
        # the numpy raster sweep is a pure Python loop; keep its run short
        reps = 1 if name == "numpy" else args.repeats
        results[name] = {k: _time(fn, reps) for k, fn in cases(args.side).items()}

    width = max(len(k) for k in results["numpy"])
    print(f"side {args.side}, median of repeats")
    print(f"{'kernel'.ljust(width)}  " + "  ".join(f"{b:>10}" for b in backends) + "   speedup")
    for k in results["numpy"]:
        row = [results[b][k] for b in backends]
        speed = f"{row[0] / row[-1]:8.1f}x" if len(row) > 1 else ""
        print(f"{k.ljust(width)}  " + "  ".join(f"{v * 1e3:8.2f}ms" for v in row) + "  " + speed)


if __name__ == "__main__":
    main()
