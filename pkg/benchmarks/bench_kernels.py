"""Compare the compiled and pure-Python shell-excess kernels.

    python benchmarks/bench_kernels.py --samples 10000 --repeat 5
"""

import argparse
import timeit

import numpy as np

from deephole import _pykernels
from deephole.lattice import shell

try:
    from deephole import _kernels
except ImportError:
    _kernels = None


def _inputs(key, n, seed):
    rng = np.random.default_rng(seed)
    xs = rng.uniform(-0.01, 0.01, n)
    ys = 1.0 + rng.uniform(-0.01, 0.01, n)
    sh = shell(key)
    ks = np.array([k for k, _ in sh.indices], dtype=np.int64)
    ls = np.array([l for _, l in sh.indices], dtype=np.int64)
    return xs, ys, ks, ls, sh.radius, sh.four_r_squared / 4.0


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--shells", type=int, nargs="+", default=[2, 10, 50])
    args = ap.parse_args(argv)

    backends = {"python": _pykernels}
    if _kernels is not None:
        backends["cython"] = _kernels
    else:
        print("compiled kernels not built; timing the fallback only")

    print(f"{'shell':>6} {'kind':>7} " + " ".join(f"{b:>12}" for b in backends) + "   speedup")
    for key in args.shells:
        xs, ys, ks, ls, r, r2 = _inputs(key, args.samples, 0)
        for code, name in enumerate(("squared", "linear", "exp", "pow3")):
            best = {}
            outs = {}
            for label, mod in backends.items():
                out = np.empty_like(xs)
                t = timeit.repeat(lambda: mod.shell_excess(xs, ys, ks, ls, r, r2, code, out),
                                  number=1, repeat=args.repeat)
                best[label] = min(t)
                outs[label] = out
            if len(outs) == 2:
                np.testing.assert_allclose(outs["python"], outs["cython"], rtol=1e-12, atol=1e-15)
                speedup = f"{best['python'] / best['cython']:8.1f}x"
            else:
                speedup = "       -"
            cells = " ".join(f"{best[b] * 1e3:10.2f}ms" for b in backends)
            print(f"{key:>6} {name:>7} {cells}   {speedup}")


if __name__ == "__main__":
    main()
