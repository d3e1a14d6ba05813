"""Time the numba path against the pure-numpy path.

Each mode runs in its own interpreter because the switch is read at import
time. Compilation happens in a warmup call and is excluded from the timings.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import json
import os
import subprocess
import sys
import time


def workloads():
    import numpy as np

    from netrecon import (GlvParameters, PriorSet, RegressorFamily, SinusoidalForcing, compute_gram,
                          random_stable_glv, simulate)
    from netrecon.lp import lp_solve
    from netrecon.reconstruct import reconstruct_network

    glv = RegressorFamily.glv()
    rng = np.random.default_rng(0)
    A, r, xs = random_stable_glv(10, rng)
    u = GlvParameters(r).inputs(SinusoidalForcing.random(10, rng, amplitude=0.5, components=3, freq_range=(0.3, 4.0)))
    traj = simulate(A, glv, xs, 30.0, 0.01, u)
    c = rng.normal(size=30)
    G = rng.normal(size=(60, 30))
    h = np.abs(rng.normal(size=60))

    A5, r5, xs5 = random_stable_glv(5, np.random.default_rng(1))
    u5 = GlvParameters(r5).inputs(SinusoidalForcing.random(5, np.random.default_rng(2), amplitude=0.5, components=3,
                                                            freq_range=(0.3, 4.0)))
    traj5 = simulate(A5, glv, xs5, 30.0, 0.01, u5)

    return {
        "simulate n=10, 3000 steps": lambda: simulate(A, glv, xs, 30.0, 0.01, u),
        "gram, 10 nodes": lambda: [compute_gram(traj, glv, i) for i in range(10)],
        "lp 60x30": lambda: lp_solve(c, G, h, nonneg=[True] * 30),
        "reconstruct n=5 identity": lambda: reconstruct_network(traj5, glv, PriorSet.unconstrained(5), "identity"),
    }


def child(repeat):
    import netrecon
    from netrecon import kernels

    kernels.warmup()
    out = {}
    for name, fn in workloads().items():
        fn()
        best = float("inf")
        for _ in range(repeat):
            t0 = time.perf_counter()
            fn()
            best = min(best, time.perf_counter() - t0)
        out[name] = best
    print(json.dumps({"numba": netrecon.NUMBA_ENABLED, "times": out}))


def run_mode(disable, repeat):
    env = dict(os.environ)
    env.pop("NETRECON_DISABLE_NUMBA", None)
    if disable:
        env["NETRECON_DISABLE_NUMBA"] = "1"
    res = subprocess.run([sys.executable, __file__, "--child", "--repeat", str(repeat)], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(res.stdout.strip().splitlines()[-1])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.child:
        child(args.repeat)
        return
    jit = run_mode(False, args.repeat)
    pure = run_mode(True, args.repeat)
    if not jit["numba"]:
        print("numba is not importable; both columns use the numpy path")
    print(f"{'workload':<28}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, tj in jit["times"].items():
        tp = pure["times"][name]
        print(f"{name:<28}{tj:>12.4f}{tp:>12.4f}{tp / tj:>9.1f}x")


if __name__ == "__main__":
    main()
