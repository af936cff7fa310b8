"""Compare the numba kernels with their numpy twins.

    python3 benchmarks/bench_backends.py --repeat 5 --pulses 1000000

Both backends are timed in the same process (the numba kernels are compiled
regardless of CFQKD_DISABLE_NUMBA); the first numba call is excluded as
warm-up. Outputs are checked for equality before any timing is reported.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from cfqkd.model import AttackScenario, ProtocolConfig
from cfqkd.montecarlo import simulate
from cfqkd.optimizer import _KIND, _kernel_constants, grid_points, objective_grid, optimize


def _best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_grid(repeat, step):
    cfg = ProtocolConfig()
    kind = _KIND[AttackScenario.COMBINED_NODISC]
    xs = grid_points(step)
    consts = _kernel_constants(cfg)
    results = {}
    for backend in ("numba", "numpy"):
        objective_grid(kind, xs, xs, consts, backend=backend)  # warm-up
        results[backend] = _best_of(lambda: objective_grid(kind, xs, xs, consts, backend=backend), repeat)
    a = objective_grid(kind, xs, xs, consts, backend="numba")
    b = objective_grid(kind, xs, xs, consts, backend="numpy")
    np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-16)
    return f"objective grid {xs.size}x{xs.size}", results


def bench_sampler(repeat, pulses):
    cfg = ProtocolConfig()
    scenario = AttackScenario.COMBINED_NODISC
    params = optimize(cfg, scenario).params
    results = {}
    outputs = {}
    for backend in ("numba", "numpy"):
        simulate(cfg, scenario, params, pulses=1000, seed=0, backend=backend)  # warm-up
        results[backend] = _best_of(
            lambda: outputs.__setitem__(backend, simulate(cfg, scenario, params, pulses=pulses, seed=1, backend=backend)),
            repeat,
        )
    assert outputs["numba"] == outputs["numpy"]
    return f"pulse sampler {pulses} pulses", results


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--pulses", type=int, default=1_000_000)
    parser.add_argument("--grid-step", type=float, default=0.001)
    args = parser.parse_args(argv)

    print(f"{'kernel':<32} {'numba s':>10} {'numpy s':>10} {'speed-up':>9}")
    for name, res in (bench_grid(args.repeat, args.grid_step), bench_sampler(args.repeat, args.pulses)):
        print(f"{name:<32} {res['numba']:>10.4f} {res['numpy']:>10.4f} {res['numpy'] / res['numba']:>8.1f}x")


if __name__ == "__main__":
    main()
