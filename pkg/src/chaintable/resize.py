"""Cooperative, non-blocking index growth.

One resize runs at a time per table.  The thread that wins the idle ->
allocating transition is the *resizer*: it allocates the new generation,
publishes the (old, new) pair, and flips to the transferring phase.  Any
other thread that also hits a full bin becomes a *helper*: it waits for
publication, then claims 16K-bin chunks with a fetch-and-add and transfers
them until none remain.  Everybody returns only after the whole transfer
finished and the table's current-index reference was swapped; the resizer
alone then drains readers off the old generation (via the per-thread
announcement cells) and retires its storage.

Client operations are never blocked globally: a bin's operations wait only
while that one bin is mid-transfer.  The per-bin protocol is

    1. CAS the header: no-transfer -> in-transfer (bumps the version, so
       every in-flight insert/delete CAS on the bin now fails and retries
       against the new index),
    2. for each live slot: read (key, value), then dw-CAS the slot to
       (transfer key, value) in a loop that absorbs racing puts — either
       the transfer captures the put's value or the put fails on the
       transfer key, re-reads the header, and retries on the new index,
    3. insert the captured pair into the new generation (hidden "shadow"
       slots move as shadow: transactional locks survive the resize),
    4. CAS the header to done-transfer.

The transfer key is a reserved key chosen so it can never hash into the
bin it is written to (one reserved key for odd bins, another for even).
"""

from __future__ import annotations

import threading
import time
from math import ceil

from .atomics import AtomicCell, AtomicCounter
from .index import BUCKET_WORDS, EXHAUSTED, UNCHAINED, Index
from .results import CapacityError, TableConfigError
from .wordcodec import (
    DONE_TRANSFER,
    IN_TRANSFER,
    NSLOTS,
    TRY_INSERT,
    with_bin_state,
    with_slot_state,
)

__all__ = ["growth_factor", "ResizeCoordinator", "ResizeEvent", "CHUNK_BINS"]

CHUNK_BINS = 16384

_IDLE = 0
_ALLOCATING = 1
_TRANSFERRING = 2
_SWAPPING = 3
_DRAINING = 4

_BIN_STATE_BITS = 0x3_00000000


def growth_factor(nbins: int) -> int:
    """Growth factor schedule: 8 while small, 4 mid-range, 2 at scale."""
    if nbins < 4096:
        return 8
    if nbins < (64 << 20):
        return 4
    return 2


class ResizeEvent:
    """Record of one completed resize (reports and tests read these)."""

    __slots__ = (
        "old_nbins",
        "new_nbins",
        "factor",
        "cause",
        "live_transferred",
        "occupancy",
        "transfer_seconds",
        "started_at",
        "participants",
    )

    def __init__(self, **kw):
        for k, v in kw.items():
            setattr(self, k, v)

    def as_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__slots__}


class ResizeCoordinator:
    """Per-table resize state machine and transfer engine."""

    def __init__(self, handle):
        self._handle = handle
        self._phase = AtomicCell(_IDLE)
        self.pair = None  # (old index, new index), set for the whole resize
        self.chunk_cursor = AtomicCounter()
        self.chunks_done = AtomicCounter()
        self.live_moved = AtomicCounter()
        self.nchunks = 0
        self.claim_log: list[tuple[int, int]] = []  # (thread id, chunk id)
        self.allocations = 0  # how many new indexes were ever allocated
        self.events: list[ResizeEvent] = []

    # -- entry point ---------------------------------------------------------

    def trigger(self, full_index: Index, cause: str) -> Index:
        """Grow past ``full_index``; returns once a newer index is current.

        Exactly one caller per resize allocates; everyone else helps move
        chunks.  All callers return only after the transfer completed and
        the handle's current index moved past ``full_index``.
        """
        handle = self._handle
        if not handle.resize_enabled:
            raise TableConfigError(
                "index is full and resizing is disabled on this table"
            )
        while True:
            cur = handle._current
            if cur is not full_index:
                return cur  # somebody already grew past it
            if self._phase.cas(_IDLE, _ALLOCATING):
                if handle._current is not full_index:
                    self._phase.store(_IDLE)
                    return handle._current
                return self._run_as_resizer(full_index, cause)
            # a resize is in flight; help if it is moving our index
            pair = self.pair
            if pair is not None and pair[0] is full_index:
                self._transfer_chunks(pair[0], pair[1])
                while handle._current is full_index:
                    time.sleep(0)
                return handle._current
            time.sleep(0)

    def _run_as_resizer(self, old: Index, cause: str) -> Index:
        handle = self._handle
        factor = growth_factor(old.nbins)
        new_nbins = old.nbins * factor
        if handle.max_nbins is not None and new_nbins > handle.max_nbins:
            self._phase.store(_IDLE)
            raise CapacityError(
                f"growth to {new_nbins} bins exceeds the configured cap "
                f"of {handle.max_nbins}"
            )
        new = Index(
            new_nbins,
            old.link_ratio,
            hash_kind=old.hash_kind,
            single_thread=handle.single_thread,
            generation=old.generation + 1,
        )
        self.allocations += 1
        self.chunk_cursor.store(0)
        self.chunks_done.store(0)
        self.live_moved.store(0)
        self.nchunks = ceil(old.nbins / CHUNK_BINS)
        started = time.time()
        t0 = time.perf_counter()
        self.pair = (old, new)
        self._phase.store(_TRANSFERRING)

        self._transfer_chunks(old, new)
        while self.chunks_done.load() < self.nchunks:
            time.sleep(0)

        self._phase.store(_SWAPPING)
        handle._current = new
        moved = self.live_moved.load()
        self.events.append(
            ResizeEvent(
                old_nbins=old.nbins,
                new_nbins=new_nbins,
                factor=factor,
                cause=cause,
                live_transferred=moved,
                occupancy=moved / old.total_slots(),
                transfer_seconds=time.perf_counter() - t0,
                started_at=started,
                participants=len({t for t, _ in self.claim_log[-self.nchunks :]}),
            )
        )

        self._phase.store(_DRAINING)
        self._retire_old(old, new)
        self.pair = None
        self._phase.store(_IDLE)
        return new

    def _retire_old(self, old: Index, new: Index) -> None:
        """Wait until no announcement cell references ``old``, then free it."""
        handle = self._handle
        if handle._announce:
            # the resizer itself is mid-operation: repoint its own cell first
            handle._tcell().ref = new
            for cell in handle._cells_snapshot():
                while cell.ref is old:
                    time.sleep(0.00005)
        old.retire()
        handle._retired_generations.append(old.generation)

    # -- transfer ------------------------------------------------------------

    def _transfer_chunks(self, old: Index, new: Index) -> None:
        """Claim and transfer chunks until none remain (resizer or helper)."""
        tid = threading.get_ident()
        nbins = old.nbins
        while True:
            cid = self.chunk_cursor.fetch_add(1)
            if cid >= self.nchunks:
                return
            self.claim_log.append((tid, cid))
            lo = cid * CHUNK_BINS
            hi = min(lo + CHUNK_BINS, nbins)
            moved = 0
            for b in range(lo, hi):
                moved += self._transfer_bin(old, b, new)
            self.live_moved.fetch_add(moved)
            self.chunks_done.fetch_add(1)

    def _transfer_bin(self, old: Index, bin_id: int, new: Index) -> int:
        """Move one bin's live slots into the new generation."""
        data = old.data
        words = old.words
        base = bin_id * BUCKET_WORDS

        while True:
            h = data[base]
            assert h & _BIN_STATE_BITS == 0, "bin transferred twice"
            nh = with_bin_state(h, IN_TRANSFER)
            if words.cas(base, h, nh):
                break
            # a concurrent insert/delete CAS won; it took effect before the
            # transfer begins — reread and claim again
        h = nh

        tk = old.transfer_key_for(bin_id)
        offs = old.slot_words_for_scan(bin_id)
        # no live slot may sit beyond the unchained boundary
        assert not _any_live(h, len(offs)), "live slot beyond chained buckets"
        moved = 0
        for s in range(len(offs)):
            st = (h >> (34 + 2 * s)) & 3
            if st & 2:  # valid or shadow
                loc = offs[s]
                while True:  # absorb racing puts on this slot
                    k = data[loc]
                    v = data[loc + 1]
                    if words.dwcas(loc, k, v, tk, v):
                        break
                assert k != tk
                self._transfer_insert(new, k, v, st)
                moved += 1

        ok = words.cas(base, h, with_bin_state(h, DONE_TRANSFER))
        assert ok, "header mutated while bin was in transfer"
        return moved

    def _transfer_insert(self, new: Index, key_word: int, value_word: int, state: int) -> None:
        """Direct insert into the new generation, preserving the slot state.

        The key cannot already be present (operations on it wait on the old
        bin until done-transfer), so no existence scan is needed — but the
        slot claim still races with client inserts of *other* keys diverted
        into the same new bin, hence the usual claim/publish CAS pair.
        """
        b = self._handle._transfer_bin_of(new, key_word, value_word)
        base = b * BUCKET_WORDS
        data = new.data
        words = new.words

        while True:
            h = data[base]
            assert h & _BIN_STATE_BITS == 0
            st = h >> 34
            s = 0
            while s < NSLOTS and (st >> (2 * s)) & 3:
                s += 1
            if s == NSLOTS:
                raise CapacityError(
                    "new index overflowed during transfer; raise the initial "
                    "size or link ratio"
                )
            if not words.cas(base, h, with_slot_state(h, s, TRY_INSERT)):
                continue
            loc = new.slot_word(b, s)
            if loc is UNCHAINED:
                if self._chain_for_slot(new, b, s) is EXHAUSTED:
                    raise CapacityError(
                        "new index ran out of link buckets during transfer; "
                        "raise the initial size or link ratio"
                    )
                loc = new.slot_word(b, s)
            data[loc] = key_word
            data[loc + 1] = value_word
            while True:
                h2 = data[base]
                if words.cas(base, h2, with_slot_state(h2, s, state)):
                    return

    @staticmethod
    def _chain_for_slot(idx: Index, bin_id: int, slot: int):
        if slot < 7:
            got = idx.allocate_links(1)
            if got is EXHAUSTED:
                return EXHAUSTED
            idx.chain_links(bin_id, "a", got)
        else:
            got = idx.allocate_links(2)
            if got is EXHAUSTED:
                return EXHAUSTED
            idx.chain_links(bin_id, "bc", got)
        return None


def _any_live(header: int, from_slot: int) -> bool:
    st = header >> (34 + 2 * from_slot)
    while st:
        if st & 2:
            return True
        st >>= 2
    return False
