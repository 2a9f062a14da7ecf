"""Compiled core vs fallback.

Monte Carlo kernel: native (Cython) against the NumPy reference, with a
check that both return identical arrays. VRF: libsodium group arithmetic
against the pure-Python group, measured in a child process because the
backend is fixed at import.

    python3 benchmarks/bench_kernels.py [--trials 20000] [--n 5000]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np


def _time(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_mc(n: int, c: int, s: int, trials: int) -> list[dict]:
    from lotto import kernels
    from lotto.protocol import ProtocolConfig

    cfg = ProtocolConfig(s=s, alpha="1.3", n_min=n)
    T = cfg.threshold(n)
    rows = []
    for name, code in (("honest", kernels.HONEST), ("biased", kernels.BIASED)):
        results = {}
        for backend in ("native", "numpy"):
            if backend == "native" and kernels.BACKEND != "native":
                continue
            sec, out = _time(
                lambda: kernels.run_trials(1, 2, n - c, c, s, T, cfg.m, code, 0.0, 0, trials, backend=backend),
                repeat=1 if backend == "numpy" else 3,
            )
            results[backend] = out
            rows.append({"kernel": f"mc-{name}", "backend": backend, "trials": trials, "seconds": sec,
                         "per_trial_us": 1e6 * sec / trials})
        if len(results) == 2:
            same = all(np.array_equal(a, b) for a, b in zip(results["native"], results["numpy"]))
            rows.append({"kernel": f"mc-{name}", "backend": "identical", "value": same})
    return rows


def bench_vrf(ops: int) -> list[dict]:
    from lotto import primitives as prim

    kp = prim.vrf_keygen(bytes(32))
    ev = prim.vrf_eval(kp.secret_key, b"round")
    cases = {
        "vrf_output": lambda: [prim.vrf_output(kp.secret_key, i.to_bytes(8, "big"), kp.public_key) for i in range(ops)],
        "vrf_eval": lambda: [prim.vrf_eval(kp.secret_key, i.to_bytes(8, "big")) for i in range(ops)],
        "vrf_verify": lambda: [prim.vrf_verify(kp.public_key, b"round", ev.beta, ev.proof) for _ in range(ops)],
    }
    rows = []
    for name, fn in cases.items():
        sec, _ = _time(fn, repeat=1)
        rows.append({"kernel": name, "backend": prim.GROUP.name, "ops": ops, "seconds": sec,
                     "per_op_us": 1e6 * sec / ops})
    return rows


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--n", type=int, default=5000)
    ap.add_argument("--vrf-ops", type=int, default=200)
    ap.add_argument("--vrf-only", action="store_true", help=argparse.SUPPRESS)
    args = ap.parse_args(argv)

    if args.vrf_only:
        print(json.dumps(bench_vrf(args.vrf_ops)))
        return 0

    rows = bench_mc(args.n, 50, 50, args.trials)
    rows += bench_vrf(args.vrf_ops)
    env = dict(os.environ, LOTTO_PURE_PYTHON="1")
    child = subprocess.run(
        [sys.executable, __file__, "--vrf-only", "--vrf-ops", str(max(args.vrf_ops // 10, 10))],
        env=env, capture_output=True, text=True, check=True,
    )
    rows += json.loads(child.stdout)
    for r in rows:
        if "value" in r:
            print(f"{r['kernel']:<14} native == numpy: {r['value']}")
        elif "trials" in r:
            print(f"{r['kernel']:<14} {r['backend']:<10} {r['seconds']:8.3f}s  {r['per_trial_us']:9.2f} us/trial")
        else:
            print(f"{r['kernel']:<14} {r['backend']:<10} {r['seconds']:8.3f}s  {r['per_op_us']:9.1f} us/op")
    return 0


if __name__ == "__main__":
    sys.exit(main())
