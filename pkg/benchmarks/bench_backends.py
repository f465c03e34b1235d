"""Timing comparison of the jitted kernels against their numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_backends.py

Covers the two loop-bound kernels:

* the direct contraction path taken for small tensor pairs, exercised here
  through repeated pairwise contractions of random chi^4 tensors;
* the bond-sum histogram behind the brute-force Ising partition function,
  exercised on tori of growing spin count.

The same work is executed once with numba enabled and once forced onto the
numpy fallback (``set_numba_enabled(False)``, equivalent to setting the
environment variable ``TNKIT_NO_NUMBA=1``). Each result pair is checked for
agreement before the timings are reported. The first jitted call pays the
compilation cost, so a warm-up round precedes the timed ones.
"""

import time

import numpy as np

from tnkit import DenseTensor, contract
from tnkit.backend import HAS_NUMBA, numba_enabled, set_numba_enabled
from tnkit.tensors import _DIRECT_KERNEL_FLOP_LIMIT
from tnkit.trg import brute_force_lnz


def _time(fn, repeats):
    best = float("inf")
    value = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        value = fn()
        best = min(best, time.perf_counter() - t0)
    return best, value


def bench_contract(chi, n_pairs, rng):
    tensors = []
    for _ in range(2 * n_pairs):
        data = rng.standard_normal((chi,) * 4) + 1j * rng.standard_normal((chi,) * 4)
        tensors.append(DenseTensor.from_ndarray(data))

    def work():
        acc = 0.0
        for k in range(n_pairs):
            out = contract(tensors[2 * k], [2, 3], tensors[2 * k + 1], [0, 1])
            acc += abs(out.data[0])
        return acc

    return work


def bench_histogram(n_side):
    def work():
        return brute_force_lnz(0.44, 1.0, n_side, 4)

    return work


def run_one(label, work, repeats):
    set_numba_enabled(True)
    work()  # warm-up: triggers compilation on the jitted path
    t_jit, v_jit = _time(work, repeats)
    set_numba_enabled(False)
    t_py, v_py = _time(work, repeats)
    set_numba_enabled(True)
    assert np.isclose(v_jit, v_py, rtol=1e-10), f"{label}: backend mismatch {v_jit} vs {v_py}"
    speedup = t_py / t_jit
    print(f"{label:<38} numba {t_jit * 1e3:9.2f} ms   numpy {t_py * 1e3:9.2f} ms   x{speedup:5.1f}")


def main():
    print(f"numba available: {HAS_NUMBA}, active: {numba_enabled()}")
    if not HAS_NUMBA:
        print("numba missing; the comparison below times the same numpy path twice")
    rng = np.random.default_rng(512)
    print("\ndirect contraction kernel (pairs of chi^4 tensors, 2 contracted legs)")
    print("(contractions above the direct-kernel flop limit take BLAS either way,")
    print(" so those rows measure dispatch parity rather than a kernel difference)")
    for chi, n_pairs, repeats in ((2, 400, 5), (3, 400, 5), (4, 200, 5)):
        flops = chi**6
        routed = "direct" if flops <= _DIRECT_KERNEL_FLOP_LIMIT else "BLAS"
        run_one(f"  chi={chi} ({flops} flops -> {routed})", bench_contract(chi, n_pairs, rng), repeats)
    print("\nbond-sum histogram (brute-force Ising torus, 4 rows)")
    for n_side in (4, 5):
        run_one(f"  {4 * n_side} spins", bench_histogram(n_side), 3)


if __name__ == "__main__":
    main()
