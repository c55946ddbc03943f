"""Compare the compiled kernels against the numpy fallbacks.

Run with ``python3 benchmarks/bench_kernels.py``.  Both backends are imported
directly, so one process times both; results are also checked for equality.
"""

import argparse
import timeit

import numpy as np

from honeyvol import _purekernels

try:
    from honeyvol import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def cases(rng, m, k, rows):
    A = rng.standard_normal((rows, k))
    b = rng.random(rows) + 0.5
    Y = rng.standard_normal((m, k)) * 0.5
    B = b[:, None] + 0.1 * rng.standard_normal((rows, m))
    a = rng.standard_normal(rows)
    return {
        "inside": ((A, b, Y), lambda mod: mod.inside),
        "inside_paired": ((A, B, Y), lambda mod: mod.inside_paired),
        "interval_lengths": ((a, B), lambda mod: mod.interval_lengths),
    }


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--samples", type=int, default=200_000)
    ap.add_argument("--dim", type=int, default=6)
    ap.add_argument("--rows", type=int, default=24)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    rng = np.random.default_rng(0)
    table = cases(rng, args.samples, args.dim, args.rows)
    print(f"{'kernel':<18}{'numpy [ms]':>12}{'cython [ms]':>13}{'speedup':>9}  agree")
    for name, (inputs, get) in table.items():
        ref_fn = get(_purekernels)
        t_py = min(timeit.repeat(lambda: ref_fn(*inputs), number=1, repeat=args.repeat))
        if _kernels is None:
            print(f"{name:<18}{1e3 * t_py:>12.2f}{'n/a':>13}{'':>9}  -")
            continue
        fn = get(_kernels)
        t_c = min(timeit.repeat(lambda: fn(*inputs), number=1, repeat=args.repeat))
        agree = np.allclose(np.asarray(ref_fn(*inputs), dtype=float), np.asarray(fn(*inputs), dtype=float))
        print(f"{name:<18}{1e3 * t_py:>12.2f}{1e3 * t_c:>13.2f}{t_py / t_c:>8.1f}x  {agree}")


if __name__ == "__main__":
    main()
