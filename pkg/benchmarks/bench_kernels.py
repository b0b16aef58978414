"""Wall-clock comparison of the compiled and pure-Python kernels.

Usage::

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel runs the same workload on both backends through the public API
and reports the best of ``--repeat`` runs. The Python workloads are small so
the script finishes in about a minute; the compiled speedup grows with size.
"""

import argparse
import time

import numpy as np

from kerrtda._backend import BACKENDS, load
from kerrtda.classical import ClassicalParams, DriveProfile, integrate_classical
from kerrtda.homology import distance_matrix, rips_persistence
from kerrtda.quantum import QuantumParams, evolve_trajectory


def available():
    out = []
    for name in BACKENDS:
        try:
            load(name)
            out.append(name)
        except ImportError:
            pass
    return out


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def workloads():
    drive = DriveProfile(4.5, 8.0)
    cloud = np.random.default_rng(0).normal(size=(120, 3))
    dist = distance_matrix(cloud)
    return {
        "classical RK4, 20 periods (40k steps)": lambda b: integrate_classical(
            0j, ClassicalParams(), drive, 160.0, backend=b),
        "quantum trajectory, N=60, 5 periods": lambda b: evolve_trajectory(
            QuantumParams(n_trunc=60), DriveProfile(0.5, 8.0), 40.0, seed=0, backend=b),
        "Rips homology, 120 points": lambda b: rips_persistence(
            dist, method="homology", backend=b),
        "Rips cohomology, 120 points": lambda b: rips_persistence(
            dist, method="cohomology", backend=b),
    }


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    names = available()
    print(f"{'kernel':42s}" + "".join(f"{n:>12s}" for n in names) + "     speedup")
    for label, fn in workloads().items():
        secs = {n: best_of(lambda: fn(n), args.repeat) for n in names}
        line = f"{label:42s}" + "".join(f"{secs[n]:11.4f}s" for n in names)
        if len(names) == 2:
            line += f"  {secs['python'] / secs['compiled']:9.1f}x"
        print(line, flush=True)


if __name__ == "__main__":
    main()
