"""One index generation: bin array, link-bucket arena, chaining, addressing.

The index is a flat vector of 64-bit words modeling cache-line-sized
buckets.  Bin ``b``'s primary bucket occupies words ``[8b, 8b+8)``:

    word 8b+0          bin header (see wordcodec)
    word 8b+1          link meta
    words 8b+2..8b+7   three 16-byte slots (key word, value word)

The link arena starts right after the bins; link bucket ``j`` occupies
words ``[links_base + 8j, links_base + 8j + 8)`` holding four slots.  Every
bucket is exactly 64 bytes and starts on a 64-byte boundary of the backing
store, so a slot (16 bytes, 16-byte aligned) is always a pair of adjacent
words — the unit the double-width CAS operates on.

A bin can chain up to three link buckets for a capacity of 15 slots: slots
0-2 live in the primary bucket, 3-6 in the bucket named by ``link_a``,
7-14 in the two consecutive buckets named by ``link_bc``.
"""

from __future__ import annotations

from array import array

import numpy as np

from .atomics import AtomicCounter, AtomicWords, PlainWords
from .hashing import MOD, bin_of
from .wordcodec import NSLOTS, UNLINKED

__all__ = [
    "Index",
    "Unchained",
    "Exhausted",
    "Raced",
    "UNCHAINED",
    "EXHAUSTED",
    "BUCKET_WORDS",
    "PRIMARY_SLOTS",
    "LINK_SLOTS",
    "RESERVED_KEY_FLOOR",
]

BUCKET_WORDS = 8        # 64 bytes
PRIMARY_SLOTS = 3
LINK_SLOTS = 4

# Keys at the very top of the 64-bit space are reserved for transfer keys;
# 64 values is enough that a decent mixer always yields both bin parities.
RESERVED_KEY_FLOOR = (1 << 64) - 64

_EMPTY_LINK_META = (UNLINKED << 32) | UNLINKED


class Unchained:
    """Slot address falls in a link bucket that has not been chained."""

    __slots__ = ()


UNCHAINED = Unchained()


class Exhausted:
    """The link arena has no buckets left; the caller must resize."""

    __slots__ = ()


EXHAUSTED = Exhausted()


class Raced:
    """Lost a chaining race; carries the winning link index."""

    __slots__ = ("winner",)

    def __init__(self, winner: int):
        self.winner = winner


class Index:
    """One generation of the table.  Shape is immutable after construction;
    only cell contents change, and only through atomic operations."""

    __slots__ = (
        "nbins",
        "mask",
        "nlinks",
        "link_ratio",
        "links_base",
        "words",
        "data",
        "link_cursor",
        "hash_kind",
        "generation",
        "retired",
        "tk_even_bin",
        "tk_odd_bin",
    )

    def __init__(
        self,
        nbins: int,
        link_ratio: int = 8,
        *,
        hash_kind: str = MOD,
        single_thread: bool = False,
        generation: int = 0,
        zero_memory: bool = True,
    ):
        if nbins < 16 or nbins & (nbins - 1):
            raise ValueError(f"nbins must be a power of two >= 16, got {nbins}")
        if link_ratio < 1:
            raise ValueError("link_ratio must be >= 1")
        self.nbins = nbins
        self.mask = nbins - 1
        self.nlinks = nbins // link_ratio
        self.link_ratio = link_ratio
        self.links_base = nbins * BUCKET_WORDS
        self.hash_kind = hash_kind
        self.generation = generation
        self.retired = False

        total = (nbins + self.nlinks) * BUCKET_WORDS
        try:
            data = array("Q", [0]) * total
        except MemoryError as e:
            raise MemoryError(
                f"cannot allocate index of {nbins} bins ({total * 8 / 2**20:.0f} MiB)"
            ) from e
        # zero_memory is implied by the allocation above; the flag is kept
        # for interface parity with builds that can skip the clear.
        del zero_memory
        # link meta words must start as (UNLINKED, UNLINKED); a zero word
        # would read as "chained to arena bucket 0"
        view = np.frombuffer(data, dtype=np.uint64)
        view[1 : self.links_base : BUCKET_WORDS] = _EMPTY_LINK_META
        del view

        self.words = PlainWords(data) if single_thread else AtomicWords(data)
        self.data = data
        self.link_cursor = AtomicCounter(0, locked=not single_thread)
        self.tk_even_bin, self.tk_odd_bin = self._draw_transfer_keys()

    def _draw_transfer_keys(self) -> tuple[int, int]:
        """Pick one reserved key hashing to an even bin and one to an odd bin.

        Candidates come from the reserved top of the keyspace, highest
        first, so the first two candidates are the two top 64-bit values.
        """
        even = odd = None
        for k in range((1 << 64) - 1, RESERVED_KEY_FLOOR - 1, -1):
            b = bin_of(k, self.hash_kind, self.nbins)
            if b & 1:
                odd = odd if odd is not None else k
            else:
                even = even if even is not None else k
            if even is not None and odd is not None:
                return even, odd
        raise AssertionError(
            "no reserved key of each bin parity found; hash function is degenerate"
        )

    def transfer_key_for(self, bin_id: int) -> int:
        """The reserved key guaranteed never to hash into ``bin_id``.

        Chosen by parity: an even bin gets the odd-binned reserved key and
        vice versa, so the key's own bin always differs from the target.
        """
        return self.tk_even_bin if bin_id & 1 else self.tk_odd_bin

    def bin_of(self, key) -> int:
        return bin_of(key, self.hash_kind, self.nbins)

    # -- slot addressing ----------------------------------------------------

    def slot_word(self, bin_id: int, slot: int):
        """Word offset of slot ``slot`` (0..14) of ``bin_id``, or UNCHAINED.

        Reads the link meta, so the result reflects chaining at call time.
        """
        assert 0 <= slot < NSLOTS
        base = bin_id * BUCKET_WORDS
        if slot < 3:
            return base + 2 + 2 * slot
        meta = self.data[base + 1]
        if slot < 7:
            link = meta & 0xFFFFFFFF
            if link == UNLINKED:
                return UNCHAINED
            return self.links_base + link * BUCKET_WORDS + 2 * (slot - 3)
        link = meta >> 32
        if link == UNLINKED:
            return UNCHAINED
        if slot < 11:
            return self.links_base + link * BUCKET_WORDS + 2 * (slot - 7)
        return self.links_base + (link + 1) * BUCKET_WORDS + 2 * (slot - 11)

    def slot_words_for_scan(self, bin_id: int) -> list[int]:
        """Word offsets of all reachable slots of a bin, in scan order.

        Stops at the first unchained region: inserts always fill the first
        invalid slot, so no live slot can sit beyond an unchained link.
        """
        base = bin_id * BUCKET_WORDS
        offs = [base + 2, base + 4, base + 6]
        meta = self.data[base + 1]
        link_a = meta & 0xFFFFFFFF
        if link_a == UNLINKED:
            return offs
        lb = self.links_base + link_a * BUCKET_WORDS
        offs += [lb, lb + 2, lb + 4, lb + 6]
        link_bc = meta >> 32
        if link_bc == UNLINKED:
            return offs
        lb = self.links_base + link_bc * BUCKET_WORDS
        offs += [lb, lb + 2, lb + 4, lb + 6, lb + 8, lb + 10, lb + 12, lb + 14]
        return offs

    # -- link arena ---------------------------------------------------------

    def allocate_links(self, count: int):
        """Claim ``count`` (1 or 2) consecutive arena buckets via fetch-and-add.

        Returns the first bucket index, or EXHAUSTED when the arena cannot
        cover the claim (the signal to trigger a resize).  Racing claims
        may overshoot the arena by at most one claim per thread.
        """
        assert count in (1, 2)
        prior = self.link_cursor.fetch_add(count)
        if prior + count > self.nlinks:
            return EXHAUSTED
        return prior

    def chain_links(self, bin_id: int, which: str, link_index: int):
        """Publish a link bucket on the bin with one CAS on the link meta.

        ``which`` is "a" (slots 3-6) or "bc" (slots 7-14, two consecutive
        buckets).  On a lost race the winner's index is returned and the
        caller's freshly allocated arena buckets are simply abandoned; they
        are reclaimed wholesale at the next resize.
        """
        off = bin_id * BUCKET_WORDS + 1
        words = self.words
        while True:
            meta = self.data[off]
            if which == "a":
                current = meta & 0xFFFFFFFF
                new = (meta & ~0xFFFFFFFF) | link_index
            else:
                current = meta >> 32
                new = (meta & 0xFFFFFFFF) | (link_index << 32)
            if current != UNLINKED:
                return Raced(current)
            if words.cas(off, meta, new):
                return "chained"

    def retire(self) -> None:
        """Release the generation's storage and trap any later access."""
        self.retired = True
        self.words.poison()
        self.data = self.words.data

    # -- inspection (tests, verification, reports) --------------------------

    def total_slots(self) -> int:
        return PRIMARY_SLOTS * self.nbins + LINK_SLOTS * self.nlinks

    def live_count(self) -> int:
        """Number of VALID or SHADOW slots (approximate under concurrency)."""
        data = self.data
        n = 0
        for base in range(0, self.links_base, BUCKET_WORDS):
            st = data[base] >> 34
            while st:
                if st & 2:
                    n += 1
                st >>= 2
        return n
