#!/usr/bin/env python3
"""Benchmark the GMP-backed rational scalar against the pure-Python fallback.

The hot kernels of this package are exact-rational recurrences whose cost is
dominated by big-integer arithmetic; gmpy2.mpq is the compiled fast path and
fractions.Fraction the fallback selected at import when gmpy2 is missing (or
when DOTCUMULANTS_PURE_PYTHON is set).  Run:

    python benchmarks/bench_backends.py
"""

import json
import os
import subprocess
import sys
import textwrap

WORKLOAD = textwrap.dedent(
    """
    import json, time
    from dotcumulants.rational import BACKEND, rat
    from dotcumulants.params import TransportParams, DelayParams
    from dotcumulants.conductance import conductance_cumulants
    from dotcumulants.jointcsn import joint_cumulants
    from dotcumulants.wigner import wigner_cumulants

    timings = {}
    t0 = time.perf_counter()
    conductance_cumulants(TransportParams(1, rat(-1, 2), 0, 64), 16)
    timings["conductance n=64 L=16"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    joint_cumulants(TransportParams(1, rat(-1, 2), 0, 96), 6, 6)
    timings["joint n=96 (6,6)"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    wigner_cumulants(DelayParams(1, 128), 10)
    timings["delay n=128 L=10"] = time.perf_counter() - t0
    print(json.dumps({"backend": BACKEND, "timings": timings}))
    """
)


def run(pure_python):
    env = dict(os.environ)
    if pure_python:
        env["DOTCUMULANTS_PURE_PYTHON"] = "1"
    else:
        env.pop("DOTCUMULANTS_PURE_PYTHON", None)
    out = subprocess.run(
        [sys.executable, "-c", WORKLOAD], env=env, capture_output=True, text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main():
    fast = run(pure_python=False)
    slow = run(pure_python=True)
    print(f"{'workload':32s} {fast['backend']:>10s} {slow['backend']:>10s}  speedup")
    for key in fast["timings"]:
        a, b = fast["timings"][key], slow["timings"][key]
        print(f"{key:32s} {a:9.4f}s {b:9.4f}s  {b / a:6.1f}x")


if __name__ == "__main__":
    main()
