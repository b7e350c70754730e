#!/usr/bin/env python3
"""Timing comparison of the compiled and pure-numpy simulation kernels.

The kernel backend is chosen at import time from the HEXREG_DISABLE_NUMBA
environment variable, so the numpy lane runs in a subprocess with the flag
set.  Both lanes integrate the same closed-loop scenario and must agree
bit for bit; the script prints a small table and the speedup.

Usage: python3 benchmarks/bench_sim.py [--steps N] [--repeats R]
"""

import argparse
import json
import os
import subprocess
import sys
import time

_WORKER = r"""
import json, sys, time
import numpy as np
import hexreg
from hexreg import kernels

steps = int(sys.argv[1])
repeats = int(sys.argv[2])

params = hexreg.HexParams(
    n_cells=8, lam=35.0, rho=1000.0, cp=4186.0,
    V_hot=5.03e-05, V_cold=7.07e-04, q_bar=0.02,
    T_in_hot=286.0, T_in_cold=307.0, u_min=0.0, u_max=0.05,
)
system = hexreg.build_hex(params)
eq = hexreg.invert_reference(system, 26.5 + 273.15)
art = hexreg.forwarding_design(system, eq, k_p=1e-6, k_i=2.6e-5)
scn = hexreg.scenario_from_dict(
    {
        "units": "C",
        "law": "forwarding",
        "t_end": steps * 0.05,
        "dt": 0.05,
        "reference_schedule": [[0.0, 26.5]],
        "x0": hexreg.pi_map(system, eq.u_ss + 0.004).tolist(),
    },
    system,
    art,
)

# First call pays any compile cost; time it separately.
t0 = time.perf_counter()
res = hexreg.run(scn)
first = time.perf_counter() - t0

best = float("inf")
for _ in range(repeats):
    t0 = time.perf_counter()
    res = hexreg.run(scn)
    best = min(best, time.perf_counter() - t0)

print(json.dumps({
    "backend": "numba" if kernels.USING_NUMBA else "numpy",
    "first_call_s": first,
    "best_s": best,
    "steps": steps,
    "us_per_step": 1e6 * best / steps,
    "y_final": float(res.y[-1]),
    "x_digest": float(np.sum(res.x[-1])),
}))
"""


def run_lane(disable_numba: bool, steps: int, repeats: int) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["HEXREG_DISABLE_NUMBA"] = "1"
    else:
        env.pop("HEXREG_DISABLE_NUMBA", None)
    out = subprocess.run(
        [sys.executable, "-c", _WORKER, str(steps), str(repeats)],
        capture_output=True, text=True, env=env, check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()

    print(f"closed-loop RK4, 16-state plant, {args.steps} steps, "
          f"best of {args.repeats}")
    lanes = []
    for disable in (False, True):
        lane = run_lane(disable, args.steps, args.repeats)
        lanes.append(lane)
        print(f"  {lane['backend']:6s}  first call {lane['first_call_s']:8.3f} s"
              f"   steady {lane['best_s']:8.4f} s"
              f"   {lane['us_per_step']:8.2f} us/step")

    fast, slow = lanes[0], lanes[1]
    if fast["backend"] == "numpy":
        print("warning: numba lane fell back to numpy (numba not importable?)")
    agree = (fast["y_final"] == slow["y_final"]
             and fast["x_digest"] == slow["x_digest"])
    print(f"  final outputs identical: {agree}")
    if slow["best_s"] > 0:
        print(f"  speedup: {slow['best_s'] / fast['best_s']:.1f}x")
    return 0 if agree else 1


if __name__ == "__main__":
    raise SystemExit(main())
