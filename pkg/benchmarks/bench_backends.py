#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-NumPy fallback.

Run directly for a side-by-side table (the script re-executes itself once
with BESSELBRIDGES_DISABLE_NUMBA=1):

    python benchmarks/bench_backends.py

or time only the active backend:

    python benchmarks/bench_backends.py --single
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def bench_bessel(n=20000):
    from besselbridges.specfun import bessel_i_scaled

    z = np.linspace(0.01, 120.0, n)
    bessel_i_scaled(0.5, 1.0)  # trigger any compilation
    t0 = time.perf_counter()
    acc = 0.0
    for zi in z:
        acc += bessel_i_scaled(0.37, zi)
    elapsed = time.perf_counter() - t0
    return {"name": f"bessel_i_scaled x{n}", "seconds": elapsed,
            "checksum": acc}


def bench_spde(m=127, replicas=32, steps=20000):
    from besselbridges import sampler, spde

    rng = sampler.RngStream(7)
    u0 = spde.reflected_bridge_field(m, replicas, rng.substream(0))
    dt = 1e-5
    # warm-up compiles the stepper
    spde.simulate_bessel1(u0, eps=0.05, T=50 * dt, dt=dt,
                          stream=rng.substream(1), record_stride=0)
    t0 = time.perf_counter()
    traj = spde.simulate_bessel1(u0, eps=0.05, T=steps * dt, dt=dt,
                                 stream=rng.substream(2), record_stride=0)
    elapsed = time.perf_counter() - t0
    return {"name": f"spde stepper {steps} steps, {m}x{replicas}",
            "seconds": elapsed, "checksum": traj.neg_fraction}


def run_single():
    from besselbridges.backend import backend_name

    results = [bench_bessel(), bench_spde()]
    return {"backend": backend_name(), "results": results}


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--single", action="store_true",
                        help="time the active backend only")
    parser.add_argument("--json", action="store_true",
                        help="emit machine-readable output")
    args = parser.parse_args()

    mine = run_single()
    if args.json:
        print(json.dumps(mine))
        return
    if args.single:
        _print_report([mine])
        return

    env = dict(os.environ)
    if mine["backend"] == "numba":
        env["BESSELBRIDGES_DISABLE_NUMBA"] = "1"
    else:
        env.pop("BESSELBRIDGES_DISABLE_NUMBA", None)
    other_raw = subprocess.run(
        [sys.executable, os.path.abspath(__file__), "--single", "--json"],
        env=env, capture_output=True, text=True, check=True)
    other = json.loads(other_raw.stdout.strip().splitlines()[-1])
    _print_report([mine, other])


def _print_report(runs):
    print(f"{'kernel':45s} {'backend':8s} {'seconds':>10s}")
    baseline = {}
    for run in runs:
        for res in run["results"]:
            print(f"{res['name']:45s} {run['backend']:8s} "
                  f"{res['seconds']:10.3f}")
            baseline.setdefault(res["name"], []).append(
                (run["backend"], res["seconds"]))
    for name, pairs in baseline.items():
        if len(pairs) == 2:
            (b1, t1), (b2, t2) = pairs
            fast, slow = (b1, b2) if t1 <= t2 else (b2, b1)
            ratio = max(t1, t2) / min(t1, t2)
            print(f"-- {name}: {fast} is {ratio:.1f}x faster than {slow}")


if __name__ == "__main__":
    main()
