"""Benchmark the RK4 stepper backends and the two integration engines.

Run from the repo root after installing the package:

    python3 benchmarks/bench_kernels.py

Two comparisons are reported:

  1. stepper backends (numpy reference vs compiled) on the direct
     engine's hot loop, at two system sizes;
  2. the aggregated transfer-matrix engine vs the direct stepper on a
     small model over a long horizon, where aggregation pays off.

Both comparisons also print the max elementwise deviation between the
final states, which should sit at rounding level.
"""

import time

import numpy as np

from dimer_nm import kernels
from dimer_nm.dynamics import integrate, suggest_dt
from dimer_nm.harness import initial_state
from dimer_nm.model import ModelParams, apply_f, build_full_model, build_symmetric_model


def _time(fn, repeats=3):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_steppers():
    print("== stepper backends ==")
    backends = kernels.available_backends()
    if len(backends) < 2:
        print("compiled backend not built; only %s available" % list(backends))
    for n_fock, n_steps in ((3, 2000), (6, 500)):
        p = apply_f(0.1, ModelParams.symmetric(n_fock=n_fock))
        m = build_full_model(p)
        rho0 = initial_state(m)
        jumps = [op for op, _ in m.jumps]
        rates = [r for _, r in m.jumps]
        dt = suggest_dt(m)
        print(f"-- dim {m.dim} ({n_steps} steps, dt={dt:g})")
        finals = {}
        for name, stepper in sorted(backends.items()):
            def run(stepper=stepper):
                rho = rho0.copy()
                stepper(rho, m.h_eff, jumps, rates, dt, n_steps)
                return rho

            secs, rho = _time(run)
            finals[name] = rho
            print(f"   {name:10s} {secs:8.4f} s   {n_steps / secs:10.0f} steps/s")
        if len(finals) == 2:
            ref, spd = sorted(finals)
            diff = np.max(np.abs(finals[ref] - finals[spd]))
            print(f"   max |{ref} - {spd}| = {diff:.3e}")


def bench_engines():
    print("== integration engines (symmetric model, t_end=50) ==")
    p = apply_f(0.1, ModelParams.symmetric())
    m = build_symmetric_model(p)
    rho0 = initial_state(m)
    finals = {}
    for method in ("aggregated", "direct"):
        def run(method=method):
            return integrate(m, rho0, t_end=50.0, store_every=100,
                             observables=[], method=method)

        secs, traj = _time(run, repeats=2)
        finals[method] = traj.states[-1]
        print(f"   {method:10s} {secs:8.4f} s")
    diff = np.max(np.abs(finals["aggregated"] - finals["direct"]))
    print(f"   max |aggregated - direct| = {diff:.3e}")


if __name__ == "__main__":
    print(f"active backend: {kernels.active_backend()}")
    bench_steppers()
    bench_engines()
