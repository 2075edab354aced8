"""Numeric hot loops with numba-compiled and pure numpy/Python twins.

The backend is chosen once at import time from the ``CLONEKIT_KERNELS``
environment variable: ``numba`` (default when importable), or ``numpy`` for
the fallback path.  Both backends compute identical results; the flag is a
performance knob only, and the test suite runs the crossover checks on both.
"""

from __future__ import annotations

import os

import numpy as np

_requested = os.environ.get("CLONEKIT_KERNELS", "auto").lower()

if _requested not in ("auto", "numba", "numpy"):
    raise RuntimeError(
        f"CLONEKIT_KERNELS={_requested!r} is not one of auto/numba/numpy"
    )

HAS_NUMBA = False
if _requested in ("auto", "numba"):
    try:
        from numba import njit

        HAS_NUMBA = True
    except ImportError:
        if _requested == "numba":
            raise
        HAS_NUMBA = False

JIT_OPTIONS = {"nogil": True, "cache": True}

BACKEND = "numba" if HAS_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# preservation check: does f applied column-wise to member tuples stay inside?


def _preserves_py(table, n, tuples, mask, size):
    m = tuples.shape[0]
    k = tuples.shape[1]
    if m == 0:
        return True
    # odometer over n-tuples of member rows
    pick = np.zeros(n, dtype=np.int64)
    while True:
        out_idx = 0
        for j in range(k):
            fi = 0
            for a in range(n):
                fi = fi * size + tuples[pick[a], j]
            out_idx = out_idx * size + table[fi]
        if not mask[out_idx]:
            return False
        a = n - 1
        while a >= 0:
            pick[a] += 1
            if pick[a] < m:
                break
            pick[a] = 0
            a -= 1
        if a < 0:
            return True


if HAS_NUMBA:
    _preserves_nb = njit(**JIT_OPTIONS)(_preserves_py)


def preserves(table, n, tuples, mask, size) -> bool:
    table = np.ascontiguousarray(table, dtype=np.int8)
    tuples = np.ascontiguousarray(tuples, dtype=np.int64)
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    if HAS_NUMBA:
        return bool(_preserves_nb(table, n, tuples, mask, size))
    return bool(_preserves_py(table, n, tuples, mask, size))


# ---------------------------------------------------------------------------
# subpower closure: close a set of tuples (as a dense mask over size**k
# indices) under one operation applied coordinatewise.


def _apply_op_to_set_py(mask, k, table, n, size):
    """One round: all images of member tuples under the operation.  Returns a
    new mask of the images (not unioned with the input)."""
    idxs = np.nonzero(mask)[0]
    m = idxs.shape[0]
    out = np.zeros(mask.shape[0], dtype=np.bool_)
    if m == 0:
        return out
    # decode member tuples once
    tup = np.empty((m, k), dtype=np.int64)
    for r in range(m):
        x = idxs[r]
        for j in range(k - 1, -1, -1):
            tup[r, j] = x % size
            x //= size
    pick = np.zeros(n, dtype=np.int64)
    while True:
        out_idx = 0
        for j in range(k):
            fi = 0
            for a in range(n):
                fi = fi * size + tup[pick[a], j]
            out_idx = out_idx * size + table[fi]
        out[out_idx] = True
        a = n - 1
        while a >= 0:
            pick[a] += 1
            if pick[a] < m:
                break
            pick[a] = 0
            a -= 1
        if a < 0:
            return out


if HAS_NUMBA:
    _apply_op_to_set_nb = njit(**JIT_OPTIONS)(_apply_op_to_set_py)


def apply_op_to_set(mask, k, table, n, size):
    mask = np.ascontiguousarray(mask, dtype=np.bool_)
    table = np.ascontiguousarray(table, dtype=np.int8)
    if HAS_NUMBA:
        return _apply_op_to_set_nb(mask, k, table, n, size)
    return _apply_op_to_set_py(mask, k, table, n, size)


# ---------------------------------------------------------------------------
# bitset sweep used by the enumeration: for each candidate basis (a bitmask
# over the relation universe), AND together the preserved-sets of all probe
# operations that pass on the whole candidate.


def _approx_sat_py(cands, rows, full):
    out = np.empty(cands.shape[0], dtype=np.uint64)
    for i in range(cands.shape[0]):
        c = cands[i]
        acc = full
        for r in range(rows.shape[0]):
            row = rows[r]
            if row & c == c:
                acc &= row
        out[i] = acc
    return out


if HAS_NUMBA:
    _approx_sat_nb = njit(**JIT_OPTIONS)(_approx_sat_py)


def approx_sat(cands, rows, full):
    cands = np.ascontiguousarray(cands, dtype=np.uint64)
    rows = np.ascontiguousarray(rows, dtype=np.uint64)
    full = np.uint64(full)
    if HAS_NUMBA:
        return _approx_sat_nb(cands, rows, full)
    return _approx_sat_py(cands, rows, full)


# ---------------------------------------------------------------------------
# generalized arc consistency pass for the table-constraint solver.
#
# Data layout (flattened int64 arrays, shared by both backends):
#   domains:   (nvars,) bitmask of allowed values (domain size <= 27)
#   scopes:    concatenated variable ids; constraint c covers
#              scopes[scope_off[c]:scope_off[c+1]]
#   tuples:    concatenated allowed tuples, row-major per constraint;
#              constraint c has tuple_cnt[c] rows starting at tuple_off[c]
#   touch:     constraint ids grouped by variable (touch_off offsets)
# Returns 0 on a wiped-out domain, 1 otherwise; domains pruned in place.
# The GAC fixpoint is unique, so the result is independent of queue order.


def _gac_pass_py(domains, scopes, scope_off, tuples, tuple_off, tuple_cnt, queue, in_queue, touch, touch_off):
    head = 0
    tail = 0
    for c in range(scope_off.shape[0] - 1):
        queue[tail] = c
        tail += 1
        in_queue[c] = True
    cap = queue.shape[0]
    while head != tail:
        c = queue[head % cap]
        head += 1
        in_queue[c] = False
        s0 = scope_off[c]
        width = scope_off[c + 1] - s0
        t0 = tuple_off[c]
        cnt = tuple_cnt[c]
        supported = np.zeros(width, dtype=np.int64)
        for r in range(cnt):
            base = t0 + r * width
            ok = True
            for p in range(width):
                v = tuples[base + p]
                if not (domains[scopes[s0 + p]] >> v) & 1:
                    ok = False
                    break
            if ok:
                for p in range(width):
                    supported[p] |= 1 << tuples[base + p]
        for p in range(width):
            var = scopes[s0 + p]
            newdom = domains[var] & supported[p]
            if newdom != domains[var]:
                if newdom == 0:
                    return 0
                domains[var] = newdom
                for q in range(touch_off[var], touch_off[var + 1]):
                    cc = touch[q]
                    if not in_queue[cc]:
                        queue[tail % cap] = cc
                        tail += 1
                        in_queue[cc] = True
    return 1


if HAS_NUMBA:
    _gac_pass_nb = njit(**JIT_OPTIONS)(_gac_pass_py)


def gac_pass(domains, scopes, scope_off, tuples, tuple_off, tuple_cnt, touch, touch_off):
    """Run GAC to fixpoint.  Mutates ``domains``; returns False on wipeout."""
    ncons = scope_off.shape[0] - 1
    # in_queue guarantees at most ncons live entries, so the ring never wraps
    # onto unread slots.
    queue = np.empty(max(ncons + 1, 16), dtype=np.int64)
    in_queue = np.zeros(max(ncons, 1), dtype=np.bool_)
    fn = _gac_pass_nb if HAS_NUMBA else _gac_pass_py
    res = fn(domains, scopes, scope_off, tuples, tuple_off, tuple_cnt, queue, in_queue, touch, touch_off)
    return bool(res)
