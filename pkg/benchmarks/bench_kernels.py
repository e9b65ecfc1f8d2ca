"""Time the compiled and pure-Python integrator kernels on the same runs.

    python benchmarks/bench_kernels.py [--repeat N] [--quick]

Both backends run every case through the public dynamics API; switching
times must agree, since the two kernels implement the same Dormand-Prince
scheme step for step.
"""

import argparse
import statistics
import time
import warnings

from archswitch import dynamics
from archswitch import _pykernels
from archswitch.dynamics import InertiaWarning, SimulationConfig, integrate_normal_form, simulate_switching
from archswitch.model import LoadProgram, NondimArch
from archswitch.statics import critical_point

try:
    from archswitch import _kernels
except ImportError:  # extension not built
    _kernels = None


def cases(quick: bool):
    one = NondimArch(6.0, (1.0,), 100.0)
    two = NondimArch(6.0, (1.0, 0.3), 100.0)
    out = [
        ("static damped, 1 mode", one, LoadProgram(epsilon=1e-2), "overdamped"),
        ("static undamped, 1 mode", one.with_damping(0.0), LoadProgram(epsilon=1e-2), "full"),
        ("ramp damped, 2 modes", two, LoadProgram(nu=1e3), "overdamped"),
    ]
    if not quick:
        out.append(("ramp undamped, 2 modes", two.with_damping(0.0), LoadProgram(nu=1e3), "full"))
    return [(name, arch, critical_point(arch), load, model) for name, arch, load, model in out]


def run_case(arch, cp, load, model):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", InertiaWarning)
        ev, ts = simulate_switching(arch, load, SimulationConfig(model=model, method="explicit"), cp)
    return ev.tau_switch, ts.nfev


def run_normal_form(K):
    return integrate_normal_form(K, 0.0, nu=1e3, inertial=True).tau_switch, 0


def timed(fn, repeat):
    times, result = [], None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return min(times), statistics.median(times), result


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--quick", action="store_true", help="skip the slowest case")
    args = ap.parse_args()
    if _kernels is None:
        raise SystemExit("compiled kernels are not built; reinstall with a C compiler and Cython available")

    work = [(name, (lambda a=arch, c=cp, l=load, m=model: run_case(a, c, l, m))) for name, arch, cp, load, model in cases(args.quick)]
    K = critical_point(NondimArch(6.0, (1.0,))).K
    work.append(("normal form, inertial ramp", lambda: run_normal_form(K)))

    header = f"{'case':<28}{'cython [s]':>12}{'python [s]':>12}{'speedup':>10}{'rel diff':>11}"
    print(header)
    print("-" * len(header))
    original = dynamics.kernels
    try:
        for name, fn in work:
            dynamics.kernels = _kernels
            tc, _, (tau_c, _) = timed(fn, args.repeat)
            dynamics.kernels = _pykernels
            tp, _, (tau_p, _) = timed(fn, max(1, args.repeat // 3))
            diff = abs(tau_c - tau_p) / abs(tau_c)
            print(f"{name:<28}{tc:>12.4f}{tp:>12.4f}{tp / tc:>9.1f}x{diff:>11.1e}")
    finally:
        dynamics.kernels = original


if __name__ == "__main__":
    main()
