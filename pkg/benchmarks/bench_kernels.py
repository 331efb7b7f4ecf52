"""Time the compiled and numpy membership kernels on airfoil-sized inputs.

    python benchmarks/bench_kernels.py [--repeat N]

Reports the median time of one genome evaluation (decode, membership and
counts) per backend and setup, plus the speedup.
"""
import argparse
import statistics
import timeit

import numpy as np

from concept_forge import kernels
from concept_forge.optimizer import initialize_population
from concept_forge.synthgen import AIRFOIL_SETUPS, airfoil_surrogate


def bench(backend, xs, dims, genome, n_concepts, repeat):
    labels = np.empty(xs.shape[0], dtype=np.int64)
    timer = timeit.Timer(lambda: backend.genome_counts(genome, xs, dims, n_concepts, labels))
    number, _ = timer.autorange()
    runs = timer.repeat(repeat=repeat, number=number)
    return statistics.median(runs) / number


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    backends = {"python": kernels.get_backend("python")}
    try:
        backends["compiled"] = kernels.get_backend("compiled")
    except ImportError:
        print("compiled extension not built; timing the numpy fallback only")

    print(f"{'setup':<13}{'params':>7}{'backend':>10}{'time/eval':>12}{'speedup':>9}")
    for name, dims in AIRFOIL_SETUPS.items():
        s = airfoil_surrogate(dims, seed=0)
        xs = s.partition.project(s.dataset)
        genome = initialize_population(s.dataset, s.partition, 3, seed=0)
        dims_arr = np.array(dims, dtype=np.int64)
        times = {b: bench(mod, xs, dims_arr, genome, 3, args.repeat) for b, mod in backends.items()}
        for b, t in times.items():
            speedup = times["python"] / t
            print(f"{name:<13}{genome.size:>7}{b:>10}{t * 1e3:>10.3f}ms{speedup:>8.1f}x")


if __name__ == "__main__":
    main()
