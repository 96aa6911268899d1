"""Compare the compiled kernels against the NumPy fallback.

Times the three hot kernels in-process (both backends are imported
directly, so the SKILLREPRO_NO_NATIVE switch is not needed), then runs
one full reproduction in two subprocesses, with and without the
compiled extension, since backend selection is frozen at import time.

Usage: python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

from skillrepro._kernels import fallback

try:
    from skillrepro._kernels import _native as native
except ImportError:
    native = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def report(name, t_native, t_fallback, diff):
    speedup = t_fallback / t_native
    print(f"{name:<22} native {t_native * 1e3:8.2f} ms   "
          f"fallback {t_fallback * 1e3:8.2f} ms   "
          f"speedup {speedup:5.1f}x   max diff {diff:.1e}")


def bench_estep(rng, repeats):
    S, d, K = 6000, 4, 5
    data = rng.normal(size=(S, d))
    means = rng.normal(size=(K, d))
    covs = np.empty((K, d, d))
    for k in range(K):
        M = rng.normal(size=(d, d)) * 0.3
        covs[k] = M @ M.T + np.eye(d)
    chols = np.linalg.cholesky(covs)
    log_priors = np.log(np.full(K, 1.0 / K))

    rn, ln = native.estep_responsibilities(data, means, chols, log_priors)
    rf, lf = fallback.estep_responsibilities(data, means, chols, log_priors)
    diff = max(float(np.max(np.abs(rn - rf))), abs(ln - lf))
    tn = best_of(lambda: native.estep_responsibilities(data, means, chols, log_priors), repeats)
    tf = best_of(lambda: fallback.estep_responsibilities(data, means, chols, log_priors), repeats)
    report(f"estep S={S} K={K}", tn, tf, diff)


def bench_banded(rng, repeats):
    N, bw = 4000, 2
    ab = np.zeros((bw + 1, N))
    ab[0] = rng.uniform(4.0, 6.0, size=N)
    for r in range(1, bw + 1):
        ab[r, :N - r] = rng.uniform(-0.5, 0.5, size=N - r)
    rhs = rng.normal(size=N)

    xn = native.banded_spd_solve(ab, rhs)
    xf = fallback.banded_spd_solve(ab, rhs)
    diff = float(np.max(np.abs(xn - xf)))
    tn = best_of(lambda: native.banded_spd_solve(ab, rhs), repeats)
    tf = best_of(lambda: fallback.banded_spd_solve(ab, rhs), repeats)
    report(f"banded N={N} bw={bw}", tn, tf, diff)


def bench_field(rng, repeats):
    D, T, n = 40, 400, 2
    x = rng.normal(size=(T, n))
    centers = rng.normal(size=(D, T, n))
    signs = np.where(rng.random(D) < 0.5, -1.0, 1.0)
    sigmas = rng.uniform(0.3, 1.0, size=(D, T))

    vn, gn = native.signed_gaussian_field(x, centers, signs, sigmas)
    vf, gf = fallback.signed_gaussian_field(x, centers, signs, sigmas)
    diff = max(abs(vn - vf), float(np.max(np.abs(gn - gf))))
    tn = best_of(lambda: native.signed_gaussian_field(x, centers, signs, sigmas), repeats)
    tf = best_of(lambda: fallback.signed_gaussian_field(x, centers, signs, sigmas), repeats)
    report(f"field D={D} T={T}", tn, tf, diff)


END_TO_END = """
import time
import numpy as np
from skillrepro import _kernels
from skillrepro.fixtures import build
from skillrepro.solver import reproduce

sc = build("curved-skill", seed=13)
t0 = time.perf_counter()
rep = reproduce(sc.demos, sc.constraints, sc.config)
elapsed = time.perf_counter() - t0
print(f"{_kernels.backend_name()} {elapsed:.4f} {rep.cost.total:.12e}")
"""


def bench_reproduce():
    rows = {}
    for env_flag in ("", "1"):
        env = dict(os.environ)
        if env_flag:
            env["SKILLREPRO_NO_NATIVE"] = env_flag
        else:
            env.pop("SKILLREPRO_NO_NATIVE", None)
        out = subprocess.run([sys.executable, "-c", END_TO_END], env=env,
                             capture_output=True, text=True, check=True)
        name, secs, cost = out.stdout.split()
        rows[name] = (float(secs), cost)
    tn, cost_n = rows["native"]
    tf, cost_f = rows["fallback"]
    diff = abs(float(cost_n) - float(cost_f))
    report("reproduce curved", tn, tf, diff)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--repeats", type=int, default=7)
    args = ap.parse_args(argv)

    if native is None:
        print("compiled extension not built; nothing to compare")
        return 1

    rng = np.random.default_rng(0)
    bench_estep(rng, args.repeats)
    bench_banded(rng, args.repeats)
    bench_field(rng, args.repeats)
    bench_reproduce()
    return 0


if __name__ == "__main__":
    sys.exit(main())
