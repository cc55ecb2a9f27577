#!/usr/bin/env python3
"""Benchmark the RK4 propagation kernels (compiled extension vs pure Python).

Builds the generator at a representative strongly-coupled operating point
(g = 15 kappa, drive at the pair-resonance detuning), conditions the
stationary state on one detection, and times the same fixed-step
propagation through every available backend.

Usage: python benchmarks/bench_rk4.py [--t-max 2.0] [--dt-out 0.005] [--repeat 3]
"""

import argparse
import math
import time

import numpy as np

import blockade as bl
from blockade import kernels


def build_problem():
    g = 15.0
    space = bl.make_space(8)
    params = bl.SystemParams(g=g, phi_z=0.0, eta=1.0, gamma=1.0).at_detuning(
        bl.two_photon_resonance_detuning(g)
    )
    lv = bl.build_liouvillian(bl.build_hamiltonian(space, params), params)
    rho = bl.steady_state(lv)
    conditioned, _ = bl.conditional_state(rho, bl.annihilation(space), 1)
    return lv, bl.vectorize(conditioned.mat), g


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--t-max", type=float, default=2.0)
    parser.add_argument("--dt-out", type=float, default=0.005)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()

    lv, y0, g = build_problem()
    matrix = lv.matrix
    h_cap = bl.rk4_max_step(g)
    n_sub = max(1, math.ceil(args.dt_out / min(args.dt_out, h_cap)))
    h = args.dt_out / n_sub
    n_out = int(args.t_max / args.dt_out)
    steps = n_sub * n_out
    print(
        f"state dim {matrix.shape[0]}, nnz {matrix.nnz}, "
        f"{steps} RK4 steps (h = {h:.3e}), {n_out} snapshots"
    )

    results = {}
    for backend in sorted(kernels.available_backends()):
        best = math.inf
        for _ in range(args.repeat):
            start = time.perf_counter()
            snaps = kernels.rk4_csr(
                matrix.indptr, matrix.indices, matrix.data, y0, h, n_sub, n_out,
                backend=backend,
            )
            best = min(best, time.perf_counter() - start)
        results[backend] = (best, snaps)
        rate = steps / best
        print(f"{backend:>8}: {best:8.3f} s   ({rate:,.0f} steps/s)")

    if len(results) == 2:
        slow, fast = results["python"][0], results["cython"][0]
        deviation = np.abs(results["python"][1] - results["cython"][1]).max()
        print(f"speedup: {slow / fast:.1f}x, max |difference| {deviation:.2e}")


if __name__ == "__main__":
    main()
