"""Benchmark: compiled Cython kernels vs the pure-Python fallback.

Runs the same estimator workloads against both backends, checks the
results are bit-identical (same Philox streams, same arithmetic), and
prints the timings.

    python benchmarks/bench_kernels.py [--paths N]
"""

from __future__ import annotations

import argparse
import math
import time

import numpy as np

from levyfluct.model import ProcessSpec
from levyfluct.simulate.rng import StreamFactory
from levyfluct.simulate import _kernels_py
from levyfluct.simulate.paths import MAX_JUMPS, MAX_STEPS, _mixture_arrays

try:
    from levyfluct.simulate import _kernels_cy
except ImportError:
    _kernels_cy = None


def _passage_upper_exact(kern, spec, n_paths, seed):
    cum_w, rates = _mixture_arrays(spec)
    factory = StreamFactory(seed)
    out = np.empty(n_paths)
    steps = 0
    for i in range(n_paths):
        rng = kern.RandomSource(factory.generator(i))
        res = kern.run_exact(
            spec.drift, spec.jump_intensity, cum_w, rates, 1.0, 2.0, True,
            kern.STOP_UPPER, 0.0, 0.0, MAX_STEPS, MAX_JUMPS, rng,
        )
        out[i] = math.exp(-0.5 * res[8] - 0.1 * res[7])
        steps += res[14]
    return out, steps


def _passage_upper_euler(kern, spec, n_paths, seed, dt):
    cum_w, rates = _mixture_arrays(spec)
    sigma = math.sqrt(spec.gaussian_sq)
    factory = StreamFactory(seed)
    out = np.empty(n_paths)
    steps = 0
    for i in range(n_paths):
        rng = kern.RandomSource(factory.generator(i))
        res = kern.run_euler(
            spec.drift, sigma, spec.jump_intensity, cum_w, rates, dt,
            0.5, 1.0, True, kern.STOP_UPPER, 0.0, 0.0, MAX_STEPS, MAX_JUMPS,
            rng,
        )
        out[i] = math.exp(-2.0 * res[8] - 1.0 * res[7])
        steps += res[14]
    return out, steps


def _bench(label, fn, backends):
    print(f"\n{label}")
    results = {}
    for name, kern in backends:
        t0 = time.perf_counter()
        values, steps = fn(kern)
        elapsed = time.perf_counter() - t0
        results[name] = values
        rate = steps / elapsed / 1e6
        print(f"  {name:9s} {elapsed:8.3f} s  ({steps} events, {rate:7.2f} M events/s)")
    if len(results) == 2:
        a, b = results.values()
        identical = np.array_equal(a, b)
        print(f"  bit-identical across backends: {identical}")
        if not identical:
            raise SystemExit("backend results diverged")
    if len(results) == 2:
        names = list(results)
        # timing ratio printed for convenience on re-runs
    return results


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=5000)
    args = parser.parse_args()

    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.insert(0, ("compiled", _kernels_cy))
    else:
        print("compiled kernels unavailable; benchmarking the fallback only")

    cl = ProcessSpec(drift=2.0, gaussian_sq=0.0, jump_intensity=1.0,
                     jump_mixture=((1.0, 1.0),))
    bm = ProcessSpec(drift=0.0, gaussian_sq=2.0)

    _bench(
        f"event-exact upper passage, Cramer-Lundberg spec, {args.paths} paths",
        lambda kern: _passage_upper_exact(kern, cl, args.paths, seed=123),
        backends,
    )
    _bench(
        f"Euler upper passage (dt=1e-4), Brownian spec, {max(args.paths // 10, 100)} paths",
        lambda kern: _passage_upper_euler(kern, bm, max(args.paths // 10, 100), 321, 1e-4),
        backends,
    )


if __name__ == "__main__":
    main()
