"""Ordered batches, the standalone prefetch hook, and the weak iterator.

Batching exists to overlap the memory latencies of independent requests:
phase one walks the request array issuing a prefetch hint for each
request's bin, phase two executes the requests strictly in array order.
CPython exposes no cache-prefetch instruction, so the hint itself compiles
to nothing here — what phase one still contributes is the bin computation,
which phase two reuses.  The batch also amortizes the per-request overheads
across its requests: one announcement pair (two stores) covers the whole
batch, and the read path runs as a single resident loop instead of one
public call per request.

Execution order is strictly the array order; with ``stop_on_failure`` the
first unsuccessful operation halts the batch and the remaining requests
report NOT_EXECUTED.  No reordering ever happens (out-of-order batching
can deadlock lock-manager-style clients).
"""

from __future__ import annotations

import time

from .hashing import key_word_of, mix64, mix_bytes
from .results import (
    ALREADY_PRESENT,
    FAILURE_STATUS,
    FOUND,
    NOT_EXECUTED,
    NOT_FOUND,
    OP_DELETE,
    OP_FINALIZE_ABORT,
    OP_FINALIZE_COMMIT,
    OP_GET,
    OP_INSERT,
    OP_PUT,
    OP_SHADOW_INSERT,
    BatchOutcome,
)

__all__ = ["execute_batch", "prefetch_key", "iterate_weak"]

_BIN_STATE_BITS = 0x3_00000000
_VALID = 2


def prefetch_key(handle, key) -> None:
    """Hint that ``key``'s bin is about to be accessed.

    For coroutine-style callers: prefetch, yield, then issue the request.
    Semantically inert; on this platform the hint itself is a no-op.
    """
    idx = handle._current
    if isinstance(key, int):
        kw = key
    else:
        kw = key_word_of(key)
    if handle._strong:
        _ = mix64(kw) & idx.mask
    else:
        _ = kw & idx.mask


def execute_batch(handle, requests, stop_on_failure: bool = False) -> BatchOutcome:
    """Run an ordered mixed-operation batch under one announcement pair."""
    n = len(requests)
    statuses = [NOT_EXECUTED] * n
    values = [None] * n

    cell = handle._enter() if handle._announce else None
    try:
        # phase 1: prefetch pass (bin precomputation; the cache hint part
        # is a no-op on this platform)
        mode = handle._mode
        strong = handle._strong
        idx = cell.ref if cell is not None else handle._current
        mask = idx.mask
        bins = [0] * n
        if mode == 1:  # alloc: keys are byte strings
            for i, req in enumerate(requests):
                k = req.key
                bins[i] = (mix_bytes(k) if strong else key_word_of(k)) & mask
        elif strong:
            for i, req in enumerate(requests):
                bins[i] = mix64(req.key) & mask
        else:
            for i, req in enumerate(requests):
                bins[i] = req.key & mask

        # phase 2: execute in array order
        executed = 0
        success = True
        if mode == 0 and not strong:
            executed, success = _run_inlined_mod(
                handle, cell, idx, requests, bins, statuses, values, stop_on_failure
            )
        else:
            executed, success = _run_generic(
                handle, cell, requests, statuses, values, stop_on_failure
            )
        return BatchOutcome(statuses, values, executed, success)
    finally:
        if cell is not None:
            handle._exit(cell)


def _run_generic(handle, cell, requests, statuses, values, stop_on_failure):
    """Portable phase-2 loop: full per-operation semantics via the handle."""
    get = handle.get
    insert = handle.insert
    shadow = handle.shadow_insert
    delete = handle.delete
    put = handle.put
    finalize = handle.finalize_shadow
    executed = 0
    for i, req in enumerate(requests):
        op = req.op
        if op == OP_GET:
            st, v = get(req.key, req.namespace)
        elif op == OP_INSERT:
            st, v = insert(req.key, req.value, req.namespace)
        elif op == OP_DELETE:
            st, v = delete(req.key, req.namespace)
        elif op == OP_PUT:
            st, v = put(req.key, req.value)
        elif op == OP_SHADOW_INSERT:
            st, v = shadow(req.key, req.value, req.namespace)
        elif op == OP_FINALIZE_COMMIT:
            st, v = finalize(req.key, True, req.namespace)
        elif op == OP_FINALIZE_ABORT:
            st, v = finalize(req.key, False, req.namespace)
        else:
            raise ValueError(f"unknown batch op {op}")
        statuses[i] = st
        values[i] = v
        executed += 1
        if stop_on_failure and st == FAILURE_STATUS[op]:
            return executed, False
    return executed, True


def _run_inlined_mod(handle, cell, idx, requests, bins, statuses, values, stop_on_failure):
    """Fast phase-2 loop for the common shape: inlined mode, modulo hash.

    Gets are scanned inline (the batch stays resident in one frame);
    mutating requests go through the full operation implementations.
    """
    executed = 0
    data = idx.data
    current = handle._current
    for i, req in enumerate(requests):
        op = req.op
        if op == OP_GET:
            key = req.key
            if not 0 <= key < 0xFFFFFFFFFFFFFFC0:
                handle._check_word_key(key)
            if handle._current is not current:
                # generation changed mid-batch: re-announce and rebind
                idx = handle._reannounce(cell)
                data = idx.data
                current = idx
                bins = None  # bins were computed against the old mask
            base = (bins[i] if bins is not None else key & idx.mask) << 3
            st = NOT_FOUND
            v = None
            while True:
                h = data[base]
                if h & _BIN_STATE_BITS:
                    st, v = handle._get_core(cell, idx, key, None, 0)
                    break
                sts = h >> 34
                if sts & 3 == _VALID and data[base + 2] == key:
                    v = data[base + 3]
                    if data[base] == h:
                        st = FOUND
                        break
                    continue
                if (sts >> 2) & 3 == _VALID and data[base + 4] == key:
                    v = data[base + 5]
                    if data[base] == h:
                        st = FOUND
                        break
                    continue
                if (sts >> 4) & 3 == _VALID and data[base + 6] == key:
                    v = data[base + 7]
                    if data[base] == h:
                        st = FOUND
                        break
                    continue
                if sts >> 6 == 0:
                    v = None
                    break
                st, v = handle._get_core(cell, idx, key, None, 0)
                break
        elif op == OP_INSERT:
            st, v = handle.insert(req.key, req.value, req.namespace)
        elif op == OP_DELETE:
            st, v = handle.delete(req.key, req.namespace)
        elif op == OP_PUT:
            st, v = handle.put(req.key, req.value)
        elif op == OP_SHADOW_INSERT:
            st, v = handle.shadow_insert(req.key, req.value, req.namespace)
        elif op == OP_FINALIZE_COMMIT:
            st, v = handle.finalize_shadow(req.key, True, req.namespace)
        elif op == OP_FINALIZE_ABORT:
            st, v = handle.finalize_shadow(req.key, False, req.namespace)
        else:
            raise ValueError(f"unknown batch op {op}")
        statuses[i] = st
        values[i] = v
        executed += 1
        if stop_on_failure and st == FAILURE_STATUS[op]:
            return executed, False
    return executed, True


def iterate_weak(handle, visitor) -> int:
    """Visit every live pair under a weakly-consistent non-blocking snapshot.

    Guarantees: a pair live for the whole iteration is visited exactly
    once; pairs inserted or deleted concurrently may or may not appear; a
    torn pair is never yielded (each slot read is validated against the
    bin header).  If the index migrates mid-iteration the walk restarts on
    the new generation, deduplicating what it already visited.

    Returns the number of pairs visited.
    """
    # emitted keys are tracked only when a resize could force a restart
    track = handle.resize_enabled
    emitted: set = set()
    count = 0
    while True:
        cell = handle._enter() if handle._announce else None
        try:
            idx = cell.ref if cell is not None else handle._current
            data = idx.data
            restart = False
            for b in range(idx.nbins):
                base = b * 8
                while True:
                    h = data[base]
                    if h & _BIN_STATE_BITS:
                        # this generation is migrating; wait out the swap
                        # and restart on the new one, deduplicating
                        while handle._current is idx:
                            time.sleep(0)
                        restart = True
                        break
                    offs = idx.slot_words_for_scan(b)
                    pairs = []
                    retry = False
                    for s in range(len(offs)):
                        if (h >> (34 + 2 * s)) & 3 != _VALID:
                            continue
                        loc = offs[s]
                        k = data[loc]
                        v = data[loc + 1]
                        if data[base] != h:
                            retry = True
                            break
                        pairs.append((k, v))
                    if retry:
                        continue
                    for k, v in pairs:
                        if track:
                            # slot words are copied verbatim by a transfer,
                            # so the (key, value) pair is a stable identity
                            if (k, v) in emitted:
                                continue
                            emitted.add((k, v))
                        count += 1
                        visitor(k, _present(handle, v))
                    break
                if restart:
                    break
            if not restart:
                return count
            # the new generation holds every survivor, so a fresh pass plus
            # the emitted-set is complete and duplicate-free
        finally:
            if cell is not None:
                handle._exit(cell)


def _present(handle, value_word):
    mode = handle._mode
    if mode == 0:
        return value_word
    if mode == 2:
        return None
    return handle._codec.read(value_word)
