"""Compare the compiled and pure-Python invariant kernels.

    python3 benchmarks/bench_kernels.py [--trials N] [--maps M] [--repeat R]

Times ``phi_before`` and ``phi_after`` over a seeded random corpus for the
first M reachable transition maps, and checks that both backends agree.
"""
import argparse
import time

import numpy as np

from demonic import kernels
from demonic.synthesis import enumerate_maps
from demonic.verifier import random_rows


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--maps", type=int, default=20)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    impls = kernels.implementations()
    corpus = kernels.Corpus.from_rows(random_rows(args.trials, args.seed))
    taus = [kernels.PackedTau.from_rows(m.rows)
            for m, _ in list(enumerate_maps(4))[:args.maps]]
    print(f"corpus: {len(corpus)} distributions, {len(corpus.prob)} atoms; {len(taus)} maps")
    print(f"{'backend':<8} {'phi_before':>12} {'phi_after/map':>15}")

    results = {}
    for name, impl in sorted(impls.items()):
        tb, before = best_of(lambda: kernels.phi_before(corpus, impl), args.repeat)
        ta, after = best_of(lambda: [kernels.phi_after(corpus, t, impl) for t in taus], args.repeat)
        results[name] = (tb, ta / len(taus), before, after)
        print(f"{name:<8} {tb * 1e3:>10.2f}ms {ta / len(taus) * 1e3:>13.2f}ms")

    if "cython" in results:
        py, cy = results["python"], results["cython"]
        np.testing.assert_allclose(py[2], cy[2], atol=1e-12)
        for a, b in zip(py[3], cy[3]):
            np.testing.assert_allclose(a, b, atol=1e-12)
        print(f"speedup: phi_before x{py[0] / cy[0]:.1f}, phi_after x{py[1] / cy[1]:.1f}; outputs agree")
    else:
        print("compiled backend not built; only the Python kernel was timed")


if __name__ == "__main__":
    main()
