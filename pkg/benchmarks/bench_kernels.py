"""Compare the compiled shooting kernel with the pure-Python fallback.

Run ``python3 benchmarks/bench_kernels.py [--repeat N]``. Each backend
integrates the same batch of shots (the inner loop of ``scan_solutions``)
and the script reports time per shot, the speed-up and the largest
difference between the two trajectories.
"""
import argparse
import math
import time

import numpy as np

from cknlab import _kernels_py
from cknlab.params import OneMinusPower, derive_parameters
from cknlab.radial import _series_start

try:
    from cknlab import _kernels
except ImportError:  # extension not built
    _kernels = None


def _batch(kernel, p, spec, u0s, s_out, eps0=1e-6):
    coefs, exps = spec.coefficients()
    out = []
    for u0 in u0s:
        u_s, F_s = _series_start(p, spec, u0, eps0)
        Y, status, _, _ = kernel.integrate_radial(math.log(eps0), u_s, F_s, s_out, coefs, exps,
                                                  p.a, p.bq, float(p.d), rtol=1e-10,
                                                  atol=1e-14, u_max=1e3)
        out.append(Y[-1, 0] if status == 0 else np.nan)
    return np.array(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--shots", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    p = derive_parameters(3, 0.2, 0.2)
    spec = OneMinusPower(5.0)
    u0s = np.geomspace(0.05, 1.2, args.shots)
    s_out = np.array([0.0])
    backends = {"python": _kernels_py}
    if _kernels is not None:
        backends["cython"] = _kernels
    times, results = {}, {}
    for name, kernel in backends.items():
        best = math.inf
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            results[name] = _batch(kernel, p, spec, u0s, s_out)
            best = min(best, time.perf_counter() - t0)
        times[name] = best
        print(f"{name:>7}: {1e3 * best / args.shots:8.3f} ms/shot")
    if "cython" in times:
        diff = np.nanmax(np.abs(results["cython"] - results["python"]))
        print(f"speed-up: {times['python'] / times['cython']:.1f}x, "
              f"max |u(R)| difference: {diff:.2e}")
    else:
        print("compiled kernel not available")


if __name__ == "__main__":
    main()
