"""Time the compiled path-stepping kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py --paths 256 --steps 512 --repeat 5 --threads 1 4
"""
import argparse
import time

import numpy as np

from cmclab.kernels import _core, _fallback


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def make_inputs(paths, steps, seed):
    rng = np.random.default_rng(seed)
    q0 = rng.normal(size=(paths, 4))
    q0 /= np.linalg.norm(q0, axis=1, keepdims=True)
    e0 = rng.normal(size=(paths, 3))
    w3 = 0.05 * rng.normal(size=(paths, steps, 3, 3))
    w2 = 0.05 * rng.normal(size=(paths, steps, 2, 3))
    b2 = 0.05 * rng.normal(size=(paths, steps, 2, 3))
    return q0, e0, w3, w2, b2


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--paths", type=int, default=256)
    ap.add_argument("--steps", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--threads", type=int, nargs="+", default=[1])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    q0, e0, w3, w2, b2 = make_inputs(args.paths, args.steps, args.seed)
    cases = {
        "quat_rk4": (lambda: _fallback.quat_rk4(q0, w3, 1.0, True),
                     lambda t: _core.quat_rk4(q0, w3, 1.0, True, t)),
        "quat_magnus4": (lambda: _fallback.quat_magnus4(q0, w2, 1.0),
                         lambda t: _core.quat_magnus4(q0, w2, 1.0, t)),
        "affine_magnus4": (lambda: _fallback.affine_magnus4(e0, w2, b2, 1.0),
                           lambda t: _core.affine_magnus4(e0, w2, b2, 1.0, t)),
    }
    print(f"{args.paths} paths x {args.steps} steps, best of {args.repeat}")
    for name, (slow, fast) in cases.items():
        t_py = best_of(slow, args.repeat)
        line = f"{name:15s} python {t_py * 1e3:9.2f} ms"
        if _core is None:
            print(line + "   (compiled core not available)")
            continue
        for t in args.threads:
            err = float(np.max(np.abs(fast(t) - slow())))
            t_c = best_of(lambda: fast(t), args.repeat)
            line += f" | cython[{t}] {t_c * 1e3:8.2f} ms x{t_py / t_c:6.1f} (diff {err:.1e})"
        print(line)


if __name__ == "__main__":
    main()
