#!/usr/bin/env python3
"""Benchmark the compiled simulation kernel against the pure-Python
fallback on the two-mass closed loop.

Usage: python benchmarks/bench_sim.py [--duration SECONDS] [--dt DT]
"""

import argparse
import time

import numpy as np

from rshaper.design import DelayCompensator, PiController
from rshaper.plants import paper_verbatim_statespace
from rshaper.sim import (
    SIM_BACKEND,
    ControllerConfig,
    Scenario,
    SimConfig,
    simulate_closed_loop,
)


def run(backend: str, cfg: SimConfig, repeats: int):
    ss = paper_verbatim_statespace()
    ctl = ControllerConfig(
        PiController(100.0, 150.0), DelayCompensator(100.0, 0.1923)
    )
    sc = Scenario("step-reference", 0.005, start_time=0.5)
    best = float("inf")
    trace = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        trace = simulate_closed_loop(ss, ctl, sc, cfg, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, trace


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--duration", type=float, default=20.0)
    ap.add_argument("--dt", type=float, default=1e-4)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    cfg = SimConfig(dt=args.dt, duration=args.duration)
    nsteps = cfg.nsteps
    print(f"default backend: {SIM_BACKEND}")
    print(f"closed-loop run: {nsteps} RK4 steps (dt={args.dt}, T={args.duration} s)")

    t_py, tr_py = run("python", cfg, max(1, args.repeats // 3))
    t_c, tr_c = run("compiled", cfg, args.repeats)
    drift = float(np.max(np.abs(tr_c.x - tr_py.x)))

    print(f"pure Python : {t_py:8.3f} s  ({nsteps / t_py:12.0f} steps/s)")
    print(f"compiled    : {t_c:8.3f} s  ({nsteps / t_c:12.0f} steps/s)")
    print(f"speedup     : {t_py / t_c:8.1f} x")
    print(f"max |x diff|: {drift:.3e}")


if __name__ == "__main__":
    main()
