"""Numba-accelerated kernels with a pure-numpy fallback.

Two loop-bound kernels live here: the direct (nested-loop) contraction used for
small tensors, and the bond-sum histogram behind the brute-force Ising partition
function. Everything matmul-bound stays on numpy/BLAS in the other modules.

Selection: numba is used when it imports cleanly and the environment variable
``TNKIT_NO_NUMBA`` is unset/falsy. :func:`set_numba_enabled` overrides at runtime
(used by tests and the benchmark script). Results of the two paths agree up to
floating-point reassociation of the sums.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAS_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba installed
    HAS_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return wrap


_NUMBA_OPTS = {"cache": True}

_enabled = HAS_NUMBA and not os.environ.get("TNKIT_NO_NUMBA")


def numba_enabled() -> bool:
    """True when the jitted kernels are active."""
    return _enabled


def set_numba_enabled(flag: bool) -> bool:
    """Force the backend selection; returns the previous setting.

    Enabling has no effect when numba is not installed.
    """
    global _enabled
    previous = _enabled
    _enabled = bool(flag) and HAS_NUMBA
    return previous


# --------------------------------------------------------------------------
# direct contraction kernel
# --------------------------------------------------------------------------

# Fortran-order odometer over the open indices of the output; for each output
# element an inner odometer walks the contracted indices. Strides are element
# strides into the flat (column-major) data vectors.


def _contract_direct_py(
    a_data,
    b_data,
    out,
    a_open_strides,
    b_open_strides,
    a_con_strides,
    b_con_strides,
    open_extents,
    con_extents,
    n_open_a,
):
    n_open = open_extents.shape[0]
    n_con = con_extents.shape[0]
    open_idx = np.zeros(n_open, dtype=np.int64)
    con_idx = np.zeros(n_con, dtype=np.int64)
    n_con_total = 1
    for i in range(n_con):
        n_con_total *= con_extents[i]
    for o in range(out.shape[0]):
        a_base = 0
        b_base = 0
        for i in range(n_open):
            if i < n_open_a:
                a_base += open_idx[i] * a_open_strides[i]
            else:
                b_base += open_idx[i] * b_open_strides[i - n_open_a]
        for i in range(n_con):
            con_idx[i] = 0
        acc = 0.0 + 0.0j
        for _ in range(n_con_total):
            a_off = a_base
            b_off = b_base
            for i in range(n_con):
                a_off += con_idx[i] * a_con_strides[i]
                b_off += con_idx[i] * b_con_strides[i]
            acc += a_data[a_off] * b_data[b_off]
            for i in range(n_con):
                con_idx[i] += 1
                if con_idx[i] < con_extents[i]:
                    break
                con_idx[i] = 0
        out[o] = acc
        for i in range(n_open):
            open_idx[i] += 1
            if open_idx[i] < open_extents[i]:
                break
            open_idx[i] = 0


if HAS_NUMBA:
    _contract_direct_jit = njit(**_NUMBA_OPTS)(_contract_direct_py)
else:
    _contract_direct_jit = _contract_direct_py


def contract_direct(
    a_data,
    b_data,
    out,
    a_open_strides,
    b_open_strides,
    a_con_strides,
    b_con_strides,
    open_extents,
    con_extents,
    n_open_a,
):
    """Run the direct-summation contraction kernel on flat complex data."""
    kernel = _contract_direct_jit if _enabled else _contract_direct_py
    kernel(
        a_data,
        b_data,
        out,
        a_open_strides,
        b_open_strides,
        a_con_strides,
        b_con_strides,
        open_extents,
        con_extents,
        n_open_a,
    )


# --------------------------------------------------------------------------
# Ising bond-sum histogram (brute-force partition function)
# --------------------------------------------------------------------------


def _bond_sum_histogram_py(bonds_i, bonds_j, n_spins, counts):
    """counts[b + n_bonds] += 1 for each config with total bond sum b."""
    n_bonds = bonds_i.shape[0]
    for config in range(1 << n_spins):
        total = 0
        for b in range(n_bonds):
            si = 1 - 2 * ((config >> bonds_i[b]) & 1)
            sj = 1 - 2 * ((config >> bonds_j[b]) & 1)
            total += si * sj
        counts[total + n_bonds] += 1


if HAS_NUMBA:
    _bond_sum_histogram_jit = njit(**_NUMBA_OPTS)(_bond_sum_histogram_py)
else:
    _bond_sum_histogram_jit = _bond_sum_histogram_py


def _bond_sum_histogram_numpy(bonds_i, bonds_j, n_spins, counts):
    configs = np.arange(1 << n_spins, dtype=np.uint32)
    total = np.zeros(configs.shape[0], dtype=np.int32)
    for bi, bj in zip(bonds_i, bonds_j):
        si = 1 - 2 * ((configs >> np.uint32(bi)) & 1).astype(np.int32)
        sj = 1 - 2 * ((configs >> np.uint32(bj)) & 1).astype(np.int32)
        total += si * sj
    np.add.at(counts, total + np.int64(bonds_i.shape[0]), 1)


def bond_sum_histogram(bonds_i, bonds_j, n_spins):
    """Histogram of sum_b s_i s_j over all 2**n_spins configurations.

    Returns an int64 array c where c[k] counts configurations whose total bond
    sum equals k - n_bonds (so the index range covers [-n_bonds, +n_bonds]).
    """
    n_bonds = bonds_i.shape[0]
    counts = np.zeros(2 * n_bonds + 1, dtype=np.int64)
    if _enabled:
        _bond_sum_histogram_jit(bonds_i, bonds_j, n_spins, counts)
    else:
        _bond_sum_histogram_numpy(bonds_i, bonds_j, n_spins, counts)
    return counts
