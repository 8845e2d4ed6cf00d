"""Time the numba kernels against their numpy fallbacks.

    python benchmarks/bench_kernels.py [--repeat 200]

Both paths are called directly, so one process covers both; the env flag
SPINBOSON_FBA_NO_NUMBA only changes which one the library dispatches to.
"""

import argparse
import timeit

import numpy as np

from spinboson_fba import _kernels as K


def _cases(rng, m=12, n=24):
    roots = rng.normal(size=m) + 1j * rng.normal(size=m)
    sigma = np.array([-1, -1, 1, 1], dtype=complex)
    shift = np.array([0.7, -0.7, 0.7, -0.7], dtype=complex)
    expo = np.array([-1, 1, -1, 1], dtype=complex)
    zeros = rng.normal(size=5) + 0j
    poles = rng.normal(size=5) + 0j
    upper = rng.normal(size=(n, n, 2, 2)) + 1j * rng.normal(size=(n, n, 2, 2))
    upper = upper * np.triu(np.ones((n, n)))[:, :, None, None]
    diag = np.array([upper[k, k] for k in range(n)])
    top = np.array([1.0, 0.0], dtype=complex)
    level = n - 5
    energy = diag[level, 0, 0]
    return {
        "pair_terms": ((roots, sigma, shift, expo), K.pair_terms_numpy, "_pair_terms_nb"),
        "rational_terms": ((roots, zeros, poles), K.rational_terms_numpy, "_rational_terms_nb"),
        "block_back_substitution": ((diag, upper, top, level, energy), K.block_back_substitution_numpy, "_block_back_substitution_nb"),
    }


def main(argv=None):
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=200)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"numba available: {K.HAVE_NUMBA}")
    print(f"{'kernel':<26}{'numpy us':>12}{'numba us':>12}{'speedup':>10}{'max diff':>12}")
    for name, (a, ref, nb_name) in _cases(rng).items():
        t_np = min(timeit.repeat(lambda: ref(*a), number=args.repeat, repeat=3)) / args.repeat * 1e6
        if not K.HAVE_NUMBA:
            print(f"{name:<26}{t_np:12.2f}{'-':>12}{'-':>10}{'-':>12}")
            continue
        fast = getattr(K, nb_name)
        ca = tuple(K._c(x) if isinstance(x, np.ndarray) else x for x in a)
        if name == "block_back_substitution":
            ca = ca[:3] + (int(a[3]), complex(a[4]))
        fast(*ca)  # compile
        t_nb = min(timeit.repeat(lambda: fast(*ca), number=args.repeat, repeat=3)) / args.repeat * 1e6
        r1, r2 = ref(*a), fast(*ca)
        r1 = r1 if isinstance(r1, tuple) else (r1,)
        r2 = r2 if isinstance(r2, tuple) else (r2,)
        diff = max(float(np.max(np.abs(np.asarray(x) - np.asarray(y)))) for x, y in zip(r1, r2))
        print(f"{name:<26}{t_np:12.2f}{t_nb:12.2f}{t_np / t_nb:10.1f}{diff:12.2e}")


if __name__ == "__main__":
    main()
