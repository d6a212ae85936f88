"""Out-of-line record storage and epoch-based reclamation.

In allocator mode a slot's value word is a tagged 48-bit address of a
record held outside the index.  The record stores the value bytes (always)
and the key bytes (only when the key is longer than 8 bytes; shorter keys
live fully in the slot's key word).  With variable sizing enabled, each
record carries an 8-byte header of two 32-bit lengths; with fixed sizing
the lengths come from the table configuration and no header is written.

The allocator is supplied by the embedding application (as with C++
containers).  The contract is::

    allocate(size, alignment) -> address   # address must fit in 48 bits
    release(address)
    view(address, length) -> memoryview    # dereference; writable

``view`` has no counterpart in a raw-memory implementation, where the
address itself is dereferenceable; a Python address needs an explicit
lens.  :class:`ArenaAllocator` is the default implementation.  It hands
out fresh monotonically increasing addresses and never recycles them,
which makes stale-address bugs fail loudly (the Python analogue of a
use-after-free sanitizer) and removes any ABA concern on addresses.

Reclamation after deletes is epoch-based and opt-in.  Retired addresses
park in per-epoch lists; the client periodically calls
``advance_epoch`` from all registered threads, and a retired record is
released only once every thread has advanced at least two epochs past its
retirement epoch.
"""

from __future__ import annotations

import threading

from .wordcodec import ADDR_MASK, tag_address, untag_address

__all__ = ["ArenaAllocator", "RecordCodec", "RecordView", "EpochReclaimer"]


def _align_up(n: int, align: int) -> int:
    return (n + align - 1) & ~(align - 1)


class ArenaAllocator:
    """Default allocator: fresh 48-bit addresses, loud use-after-free."""

    def __init__(self):
        self._lock = threading.Lock()
        self._next = 64  # keep address 0 unused; it reads as "no record"
        self._blocks: dict[int, bytearray] = {}
        self.allocated = 0
        self.released = 0

    def allocate(self, size: int, alignment: int = 8) -> int:
        assert size >= 0 and alignment > 0 and alignment & (alignment - 1) == 0
        with self._lock:
            addr = _align_up(self._next, alignment)
            self._next = addr + max(size, 1)
            if self._next > ADDR_MASK:
                raise MemoryError("48-bit address space exhausted")
            self._blocks[addr] = bytearray(size)
            self.allocated += 1
        return addr

    def release(self, addr: int) -> None:
        with self._lock:
            del self._blocks[addr]  # KeyError here means double release
            self.released += 1

    def view(self, addr: int, length: int | None = None) -> memoryview:
        block = self._blocks[addr]  # KeyError here means use-after-release
        mv = memoryview(block)
        return mv if length is None else mv[:length]

    def live_blocks(self) -> int:
        return len(self._blocks)


class RecordView:
    """A located record: the pointer-style read/modify surface.

    ``value`` is a writable view into the record's storage; clients that
    modify values in place do it here under their own discipline.  ``key``
    is None when the key was short enough to live in the slot.
    """

    __slots__ = ("key", "value", "key_len", "value_len", "namespace", "word")

    def __init__(self, key, value, key_len, value_len, namespace, word):
        self.key = key
        self.value = value
        self.key_len = key_len
        self.value_len = value_len
        self.namespace = namespace
        self.word = word

    def value_bytes(self) -> bytes:
        return bytes(self.value)


class RecordCodec:
    """Encodes and decodes records for one table configuration."""

    __slots__ = (
        "allocator",
        "variable",
        "fixed_key_len",
        "fixed_value_len",
        "value_align",
    )

    HEADER = 8  # two u32 lengths, present only with variable sizing

    def __init__(
        self,
        allocator,
        *,
        variable: bool,
        fixed_key_len: int = 8,
        fixed_value_len: int = 8,
        value_align: int = 8,
    ):
        self.allocator = allocator
        self.variable = variable
        self.fixed_key_len = fixed_key_len
        self.fixed_value_len = fixed_value_len
        self.value_align = value_align

    def _layout(self, key_len: int, value_len: int) -> tuple[int, int]:
        """(value offset, total size) for a record with these lengths."""
        off = self.HEADER if self.variable else 0
        if key_len > 8:
            off += key_len
        off = _align_up(off, self.value_align)
        return off, off + value_len

    def store(self, key: bytes, value: bytes, namespace: int) -> int:
        """Allocate and fill a record; returns the tagged value word.

        Runs while the inserting slot is held in the try-insert state, so
        the record is unpublished until the final header CAS.
        """
        klen, vlen = len(key), len(value)
        if not self.variable:
            if klen != self.fixed_key_len or vlen != self.fixed_value_len:
                raise ValueError(
                    f"fixed-size table expects {self.fixed_key_len}B keys and "
                    f"{self.fixed_value_len}B values, got {klen}/{vlen}"
                )
        voff, size = self._layout(klen, vlen)
        addr = self.allocator.allocate(size, self.value_align)
        mv = self.allocator.view(addr, size)
        if self.variable:
            mv[0:4] = klen.to_bytes(4, "little")
            mv[4:8] = vlen.to_bytes(4, "little")
        if klen > 8:
            base = self.HEADER if self.variable else 0
            mv[base : base + klen] = key
        mv[voff : voff + vlen] = value
        nibble = 0 if klen > 8 else klen
        return tag_address(addr, nibble, namespace)

    def read(self, word: int) -> RecordView:
        """Decode a tagged value word into a record view (no copies)."""
        addr, nibble, namespace = untag_address(word)
        if self.variable:
            head = self.allocator.view(addr, self.HEADER)
            klen = int.from_bytes(head[0:4], "little")
            vlen = int.from_bytes(head[4:8], "little")
        else:
            klen, vlen = self.fixed_key_len, self.fixed_value_len
        voff, size = self._layout(klen, vlen)
        mv = self.allocator.view(addr, size)
        key = None
        if nibble == 0:
            base = self.HEADER if self.variable else 0
            key = mv[base : base + klen]
        return RecordView(key, mv[voff : voff + vlen], klen, vlen, namespace, word)

    def key_matches(self, word: int, key: bytes) -> bool:
        """Full-key comparison against an out-of-line key (nibble 0 only)."""
        addr, _, _ = untag_address(word)
        if self.variable:
            head = self.allocator.view(addr, self.HEADER)
            klen = int.from_bytes(head[0:4], "little")
            base = self.HEADER
        else:
            klen = self.fixed_key_len
            base = 0
        if klen != len(key):
            return False
        return self.allocator.view(addr, base + klen)[base:] == key

    def release_word(self, word: int) -> None:
        self.allocator.release(word & ADDR_MASK)


class EpochReclaimer:
    """Deferred release of retired record addresses.

    The client drives progress: every registered thread must call
    :meth:`advance` periodically.  A thread that never advances pins all
    retirements (documented liveness dependency, not a leak bug).
    """

    __slots__ = ("_lock", "_global", "_locals", "_retired", "allocator", "enabled")

    def __init__(self, allocator, enabled: bool):
        self._lock = threading.Lock()
        self._global = 0
        self._locals: dict[int, int] = {}
        self._retired: dict[int, list[int]] = {}
        self.allocator = allocator
        self.enabled = enabled

    def register(self, tid: int) -> None:
        with self._lock:
            self._locals.setdefault(tid, self._global)

    def deregister(self, tid: int) -> None:
        with self._lock:
            self._locals.pop(tid, None)
            self._maybe_advance_locked()

    def retire(self, addr: int) -> None:
        """Park an address for release two epoch advances from now."""
        if not self.enabled:
            return
        with self._lock:
            self._retired.setdefault(self._global, []).append(addr)

    def advance(self, tid: int) -> int:
        """Publish this thread at the current global epoch.

        Once every registered thread has published the current epoch the
        global advances and the lists two epochs back are released.
        Returns the global epoch after the call.
        """
        with self._lock:
            self._locals[tid] = self._global
            self._maybe_advance_locked()
            return self._global

    def _maybe_advance_locked(self) -> None:
        g = self._global
        if self._locals and all(e == g for e in self._locals.values()):
            self._global = g + 1
            for epoch in [e for e in self._retired if e <= g - 1]:
                for addr in self._retired.pop(epoch):
                    self.allocator.release(addr)

    @property
    def global_epoch(self) -> int:
        return self._global

    def pending(self) -> int:
        with self._lock:
            return sum(len(v) for v in self._retired.values())
