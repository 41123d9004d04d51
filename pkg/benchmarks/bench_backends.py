"""Time the compiled and pure-Python stepping kernels on the reference orbit.

Usage::

    python benchmarks/bench_backends.py [--steps N] [--repeat R]

Prints steps per second for each method and backend and the speed-up of the
compiled kernels. Both backends must produce bit-identical trajectories; the
script checks that before timing.
"""
import argparse
import timeit

from kepler_mtpi import baselines, kernels, mtpi
from kepler_mtpi.bench import REF_M, REF_K, REF_P0, REF_Q0, REF_STEPS
from kepler_mtpi.core import PhysParams

PARAMS = PhysParams(REF_M, REF_K)


def runner(method, n_steps, stride):
    if method == "mtpi":
        return lambda: mtpi.trajectory(REF_Q0, REF_P0, REF_STEPS["mtpi"], PARAMS, n_steps, stride)[0]
    return lambda: baselines.trajectory(method, REF_Q0, REF_P0, PARAMS, REF_STEPS[method], n_steps, stride)


def measure(method, backend, n_steps, stride, repeat):
    kernels.backend = backend
    try:
        fn = runner(method, n_steps, stride)
        rows = fn()
        best = min(timeit.repeat(fn, number=1, repeat=repeat))
    finally:
        kernels.backend = kernels.compiled or kernels.pure
    return rows, best


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--steps", type=int, default=20_000)
    parser.add_argument("--stride", type=int, default=1)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)

    if kernels.compiled is None:
        print("compiled kernels are not built; timing the pure-Python backend only")
    backends = [("python", kernels.pure)] + ([("cython", kernels.compiled)] if kernels.compiled else [])
    print(f"{'method':<14}{'backend':<9}{'steps/s':>14}{'speed-up':>10}")
    for method in ("mtpi", "rk4", "leapfrog", "composition4"):
        timings = {}
        reference = None
        for name, backend in backends:
            rows, best = measure(method, backend, args.steps, args.stride, args.repeat)
            if reference is None:
                reference = rows
            elif rows.tobytes() != reference.tobytes():
                raise SystemExit(f"{method}: backends disagree")
            timings[name] = best
        for name, best in timings.items():
            gain = timings["python"] / best
            print(f"{method:<14}{name:<9}{args.steps / best:>14.3e}{gain:>9.1f}x")


if __name__ == "__main__":
    main()
