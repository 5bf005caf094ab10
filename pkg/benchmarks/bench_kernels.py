"""Compare the numba and pure-numpy kernel backends.

Both backends receive identical inputs; outputs are checked for equality and
the best of several timings is reported.  Run with

    python3 benchmarks/bench_kernels.py [--repeat 5] [--batch 4096]
"""

import argparse
import time
from fractions import Fraction

import numpy as np

from sds_irs import _kernels
from sds_irs.harness import BlockExperiment, IntransitiveExperiment
from sds_irs.permutation import all_permutations, chunk_generator, shuffle_draws
from sds_irs.subgroups import ImprimitiveWreath


def best_of(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, min(times)


def same(a, b):
    if isinstance(a, tuple):
        return all(np.array_equal(x, y) for x, y in zip(a, b))
    return np.array_equal(a, b)


def cases(batch):
    draws = shuffle_draws(chunk_generator(0, 0), batch, 3000)
    perms = _kernels.numpy_kernels.shuffle_from_draws(draws)

    block = BlockExperiment.from_fraction(3000, 50, Fraction(1, 2))
    lay = block.layout()
    labels = block.labels()

    intr = IntransitiveExperiment.from_fraction(3000, 100, Fraction(1, 2))
    ilay = intr.layout()
    umask = intr.umask()

    sym8 = np.ascontiguousarray(all_permutations(8), dtype=np.int64)
    wreath = ImprimitiveWreath.consecutive(8, 2)
    wl, wn, wf = wreath.partition()
    g8 = np.array([1, 0, 2, 3, 4, 5, 6, 7], dtype=np.int64)

    return [
        ("shuffle_from_draws m=3000", "shuffle_from_draws", (draws,)),
        ("count_block_split m=3000 d=50", "count_block_split",
         (perms, lay.zs, lay.gzs, lay.z0, lay.y0, labels)),
        ("count_intransitive m=3000 r=100", "count_intransitive",
         (perms, ilay.zs, ilay.gzs, umask)),
        ("conj_preserves_partition Sym(8) wreath", "conj_preserves_partition",
         (sym8, g8, wl, wn, wf)),
    ]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--batch", type=int, default=4096)
    args = ap.parse_args()

    if _kernels.numba_kernels is None:
        raise SystemExit("numba is not importable; nothing to compare")

    print(f"{'kernel':42s} {'numpy [ms]':>11s} {'numba [ms]':>11s} {'speedup':>8s}  equal")
    for name, attr, inputs in cases(args.batch):
        np_fn = getattr(_kernels.numpy_kernels, attr)
        nb_fn = getattr(_kernels.numba_kernels, attr)
        nb_fn(*inputs)  # compile (or load from cache) outside the timing
        a, t_np = best_of(lambda: np_fn(*inputs), args.repeat)
        b, t_nb = best_of(lambda: nb_fn(*inputs), args.repeat)
        print(f"{name:42s} {t_np * 1e3:11.2f} {t_nb * 1e3:11.2f} {t_np / t_nb:8.1f}  {same(a, b)}")


if __name__ == "__main__":
    main()
