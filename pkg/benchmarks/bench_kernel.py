"""Wall-clock comparison of the compiled and pure-Python chain kernels.

    python3 benchmarks/bench_kernel.py [--iterations N] [--repeats R]

Both backends run the same seeded chains, so the script also checks that
they produce identical draws.  The risk-difference step is vectorised
numpy on the Python side, so there the gap is small.
"""

import argparse
import time

import numpy as np

from metropolis_epi import _backend
from metropolis_epi.estimands import DEFAULT_INCIDENCE, rd_posterior
from metropolis_epi.fileio import bundled_data_path, load_dataset
from metropolis_epi.sampler import SamplerConfig, Variant, run_chain
from metropolis_epi.target import LogisticPosterior


def best_of(fn, repeats):
    times, out = [], None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--iterations", type=int, default=100_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not _backend.HAVE_COMPILED:
        raise SystemExit("compiled kernel not available; rebuild with `pip install -e . --no-build-isolation`")

    target = LogisticPosterior(load_dataset(bundled_data_path()))
    print(f"{'task':<28}{'python s':>10}{'compiled s':>12}{'speedup':>9}  agreement")
    for variant in Variant:
        cfg = SamplerConfig(variant, iterations=args.iterations)
        tp, cp = best_of(lambda: run_chain(target, cfg, (2.0, -3.0), backend="python"), args.repeats)
        tc, cc = best_of(lambda: run_chain(target, cfg, (2.0, -3.0), backend="compiled"), args.repeats)
        same = np.array_equal(cp.draws, cc.draws)
        print(f"{'chain ' + variant.value:<28}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.1f}  {'bit-identical' if same else 'DIFFERENT'}")

    draws = run_chain(target, SamplerConfig(iterations=args.iterations), (2.0, -3.0)).draws
    tp, rp = best_of(lambda: rd_posterior(draws, DEFAULT_INCIDENCE, 5 / 198, backend="python"), args.repeats)
    tc, rc = best_of(lambda: rd_posterior(draws, DEFAULT_INCIDENCE, 5 / 198, backend="compiled"), args.repeats)
    # numpy's vectorised exp and libm's exp may differ in the last bit
    rel = float(np.max(np.abs(rp.rd - rc.rd)) / np.max(np.abs(rc.rd)))
    print(f"{'per-draw RD calibration':<28}{tp:>10.3f}{tc:>12.4f}{tp / tc:>9.1f}  max rel diff {rel:.1e}")


if __name__ == "__main__":
    main()
