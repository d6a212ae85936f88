"""The table handle and its client operations.

Three modes share one protocol surface:

* ``inlined``  — 64-bit keys and values stored directly in slots,
* ``alloc``    — byte-string keys/values in out-of-line records, the slot
  holds an 8-byte key signature and a tagged record address; gets return a
  record view (pointer-style API) and there is no put,
* ``hashset``  — 64-bit keys only; insert/delete double as lock/unlock.

All index mutations are compare-and-swaps on a bin's packed header word or
double-width CASes on one slot; reads are optimistic and validate against
the header version.  Nothing blocks except a bounded wait on a bin that is
mid-transfer during a resize.

Inserts follow the two-CAS protocol: claim the first invalid slot by
flipping its state to try-insert (header CAS #1), write the slot words
(chaining link buckets and allocating records while the claim is held),
then publish by flipping try-insert to valid (header CAS #2).  A shadow
insert publishes to the hidden shadow state instead, which acts as a
per-key lock until committed or aborted.

Every public operation announces the index generation it works on in a
per-thread cell (when resizing is enabled) so a finished resize can tell
when the old generation is safe to reclaim.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass

from .hashing import MOD, STRONG, key_word_of, mix64, mix_bytes
from .index import (
    BUCKET_WORDS,
    EXHAUSTED,
    RESERVED_KEY_FLOOR,
    UNCHAINED,
    Index,
)
from .records import ArenaAllocator, EpochReclaimer, RecordCodec
from .resize import ResizeCoordinator
from .results import (
    ALREADY_PRESENT,
    DELETED,
    DONE,
    FOUND,
    INSERTED,
    NOT_FOUND,
    UPDATED,
    TableConfigError,
)
from .wordcodec import (
    ADDR_MASK,
    INVALID,
    NSLOTS,
    SHADOW,
    TRY_INSERT,
    VALID,
    with_slot_state,
)

__all__ = ["TableConfig", "TableHandle", "MODE_INLINED", "MODE_ALLOC", "MODE_HASHSET"]

MODE_INLINED = 0
MODE_ALLOC = 1
MODE_HASHSET = 2

_MODES = {"inlined": MODE_INLINED, "alloc": MODE_ALLOC, "hashset": MODE_HASHSET}

_BIN_STATE_BITS = 0x3_00000000
_IN_TRANSFER_BITS = 0x1_00000000

# _find result kinds
_HIT = 0
_MISS = 1
_WAIT = 2
_DIVERT = 3

# scan masks: bit per slot-state code
_WANT_VALID = 1 << VALID
_WANT_SHADOW = 1 << SHADOW
_WANT_LIVE = _WANT_VALID | _WANT_SHADOW

_NOT_FOUND_RESULT = (NOT_FOUND, None)


@dataclass(slots=True)
class TableConfig:
    """Construction-time configuration of a table."""

    mode: str = "inlined"
    nbins: int = 1024
    link_ratio: int = 8
    hash_kind: str = MOD
    resize: bool = False
    max_nbins: int | None = None
    single_thread: bool = False
    namespaces: bool = False
    variable_sizes: bool = False
    key_size: int = 8          # fixed record key length (alloc mode)
    value_size: int = 8        # fixed record value length (alloc mode)
    value_align: int = 8
    reclaim: bool = False      # epoch-based record reclamation opt-in
    allocator: object = None   # alloc mode; defaults to ArenaAllocator

    def validate(self) -> None:
        if self.mode not in _MODES:
            raise TableConfigError(f"unknown mode {self.mode!r}")
        if self.hash_kind not in (MOD, STRONG):
            raise TableConfigError(f"unknown hash kind {self.hash_kind!r}")
        if self.mode != "alloc":
            if self.variable_sizes:
                raise TableConfigError("variable sizes need allocator mode")
            if self.reclaim:
                raise TableConfigError("record reclamation needs allocator mode")
            if self.namespaces:
                raise TableConfigError("namespaces need allocator mode")
        if self.max_nbins is not None and self.max_nbins < self.nbins:
            raise TableConfigError("max_nbins below the initial bin count")


class _Cell:
    """Per-thread announcement cell: the index generation in use, or None."""

    __slots__ = ("ref", "tid")

    def __init__(self, tid: int):
        self.ref = None
        self.tid = tid


class TableHandle:
    """Client-facing table object; safe for any number of threads
    (unless built in single-thread mode)."""

    def __init__(self, config: TableConfig):
        config.validate()
        self.config = config
        self._mode = _MODES[config.mode]
        self._strong = config.hash_kind == STRONG
        self.resize_enabled = config.resize
        self.single_thread = config.single_thread
        self.max_nbins = config.max_nbins
        self._announce = config.resize and not config.single_thread
        self._current = Index(
            config.nbins,
            config.link_ratio,
            hash_kind=config.hash_kind,
            single_thread=config.single_thread,
        )
        self._resize = ResizeCoordinator(self)
        self._retired_generations: list[int] = []

        self._tlocal = threading.local()
        self._cells: list[_Cell] = []
        self._reg_lock = threading.Lock()

        self.allocator = None
        self._codec = None
        self._epochs = None
        if self._mode == MODE_ALLOC:
            self.allocator = config.allocator or ArenaAllocator()
            self._codec = RecordCodec(
                self.allocator,
                variable=config.variable_sizes,
                fixed_key_len=config.key_size,
                fixed_value_len=config.value_size,
                value_align=config.value_align,
            )
            self._epochs = EpochReclaimer(self.allocator, config.reclaim)

        # instrumentation for tests (announcement pairing, etc.)
        self._instrument = False
        self._enter_count = 0
        self._exit_count = 0

    # -- thread registry and announcements -----------------------------------

    def register_thread(self) -> _Cell:
        """Register the calling thread; implicit on first use."""
        cell = _Cell(threading.get_ident())
        with self._reg_lock:
            self._cells.append(cell)
        self._tlocal.cell = cell
        if self._epochs is not None:
            self._epochs.register(cell.tid)
        return cell

    def _tcell(self) -> _Cell:
        try:
            return self._tlocal.cell
        except AttributeError:
            return self.register_thread()

    def _cells_snapshot(self) -> list[_Cell]:
        with self._reg_lock:
            return list(self._cells)

    def _enter(self) -> _Cell:
        """Announce entry: publish the current generation in our cell.

        The store-then-recheck loop guarantees the generation we operate
        on was announced before we read from it, so a resizer draining the
        old generation cannot miss us.
        """
        cell = self._tcell()
        cur = self._current
        cell.ref = cur
        while self._current is not cur:
            cur = self._current
            cell.ref = cur
        if self._instrument:
            self._enter_count += 1
        return cell

    def _exit(self, cell: _Cell) -> None:
        cell.ref = None
        if self._instrument:
            self._exit_count += 1

    def _divert(self, cell: _Cell | None, idx: Index) -> Index:
        """Move an in-flight operation past ``idx`` to the next generation.

        Re-announces (generation change mid-operation) and revalidates the
        target is still reachable before handing it out, so a later resize
        can never reclaim an index under our feet.
        """
        while True:
            pair = self._resize.pair
            if pair is not None and pair[0] is idx:
                target = pair[1]
            else:
                target = self._current
                if target is idx:
                    # transfer observed but new index not yet visible here
                    time.sleep(0)
                    continue
            if cell is None:
                return target
            cell.ref = target
            pair = self._resize.pair
            if target is self._current or (pair is not None and pair[1] is target):
                return target

    @staticmethod
    def _wait_bin(idx: Index, base: int) -> None:
        """Bounded per-bin wait while this one bin is mid-transfer."""
        data = idx.data
        while data[base] & _BIN_STATE_BITS == _IN_TRANSFER_BITS:
            time.sleep(0)

    # -- key/value validation and encoding ------------------------------------

    def _check_word_key(self, key) -> None:
        if not isinstance(key, int) or not 0 <= key < RESERVED_KEY_FLOOR:
            if isinstance(key, int) and key >= RESERVED_KEY_FLOOR:
                raise ValueError(
                    f"keys at or above {RESERVED_KEY_FLOOR:#x} are reserved "
                    "as transfer keys"
                )
            raise TypeError("this table mode takes 64-bit unsigned integer keys")

    def _check_bytes_key(self, key) -> None:
        if not isinstance(key, (bytes, bytearray)) or len(key) == 0:
            raise TypeError("allocator mode takes non-empty byte-string keys")

    def _check_namespace(self, namespace) -> int:
        if namespace is None:
            return 0
        if self._mode != MODE_ALLOC:
            raise TableConfigError("namespaces are only available in allocator mode")
        if not self.config.namespaces:
            raise TableConfigError("namespaces are not enabled on this table")
        if not 0 <= namespace <= 0xFFF:
            raise ValueError("namespace must be in 0..4095")
        return namespace

    def _bin_of(self, idx: Index, key_word: int) -> int:
        if self._strong:
            return mix64(key_word) & idx.mask
        return key_word & idx.mask

    def _transfer_bin_of(self, new: Index, key_word: int, value_word: int) -> int:
        """Bin of a transferred slot in the new generation (resize hook)."""
        if self._mode == MODE_ALLOC and self._strong:
            nibble = value_word >> 60
            if nibble:
                key = key_word.to_bytes(8, "little")[:nibble]
            else:
                key = bytes(self._codec.read(value_word).key)
            return mix_bytes(key) & new.mask
        return self._bin_of(new, key_word)

    # -- scanning --------------------------------------------------------------

    def _find(self, idx: Index, b: int, key_word: int, key_bytes, ns: int, want: int):
        """Locate ``key`` in bin ``b`` among slots whose state is in ``want``.

        Returns one of
            (_HIT, slot, word_off, value_word, header)  validated match
            (_MISS, header, first_invalid_slot)         no match (no
                revalidation: keys never relocate within a bin outside of
                resize, which this reports as _WAIT/_DIVERT instead)
            (_WAIT, base) / (_DIVERT, base)             bin is transferring
        """
        data = idx.data
        base = b * BUCKET_WORDS
        alloc = self._mode == MODE_ALLOC
        while True:
            h = data[base]
            bs = h & _BIN_STATE_BITS
            if bs:
                return (_WAIT, base) if bs == _IN_TRANSFER_BITS else (_DIVERT, base)
            offs = idx.slot_words_for_scan(b)
            noffs = len(offs)
            st = h >> 34
            first_inv = -1
            restart = False
            s = 0
            while st or (first_inv < 0 and s < NSLOTS):
                code = st & 3
                st >>= 2
                cur = s
                s += 1
                if code == 0:
                    if first_inv < 0:
                        first_inv = cur
                    continue
                if not (want >> code) & 1 or cur >= noffs:
                    continue
                loc = offs[cur]
                if data[loc] != key_word:
                    continue
                vw = data[loc + 1]
                if data[base] != h:
                    restart = True
                    break
                if alloc:
                    if (vw >> 48) & 0xFFF != ns:
                        continue
                    nibble = vw >> 60
                    klen = len(key_bytes)
                    if klen <= 8:
                        if nibble != klen:
                            continue
                    elif nibble != 0 or not self._codec.key_matches(vw, key_bytes):
                        continue
                return (_HIT, cur, loc, vw, h)
            if restart:
                continue
            return (_MISS, h, first_inv)

    def _payload(self, value_word: int):
        """Mode-specific payload for found/already-present/deleted results."""
        if self._mode == MODE_INLINED:
            return value_word
        if self._mode == MODE_HASHSET:
            return None
        return self._codec.read(value_word)

    # -- get -------------------------------------------------------------------

    def get(self, key, namespace=None):
        """Look the key up: (FOUND, payload) or (NOT_FOUND, None).

        The payload is the inlined value, None in hashset mode, or a
        record view in allocator mode.
        """
        if self._mode == MODE_ALLOC:
            self._check_bytes_key(key)
            ns = self._check_namespace(namespace)
            key_word = key_word_of(key)
            key_bytes = key
            if self._epochs.enabled and not self._announce:
                self._tcell()  # join the reclamation grace protocol
        else:
            if namespace is not None:
                self._check_namespace(namespace)  # raises: wrong mode
            self._check_word_key(key)
            key_word = key
            key_bytes = None
            ns = 0

        if not self._announce:
            return self._get_core(None, self._current, key_word, key_bytes, ns)
        cell = self._enter()
        try:
            return self._get_core(cell, cell.ref, key_word, key_bytes, ns)
        finally:
            self._exit(cell)

    def _get_core(self, cell, idx, key_word, key_bytes, ns):
        mode = self._mode
        strong = self._strong
        while True:
            data = idx.data
            if strong:
                b = mix64(key_word) & idx.mask
            else:
                b = key_word & idx.mask
            base = b << 3
            if mode == MODE_INLINED:
                # hot path: unrolled primary-bucket scan, one word read per
                # step, full-header compare as the version validation
                while True:
                    h = data[base]
                    bs = h & _BIN_STATE_BITS
                    if bs:
                        break
                    st = h >> 34
                    if st & 3 == VALID and data[base + 2] == key_word:
                        v = data[base + 3]
                        if data[base] == h:
                            return (FOUND, v)
                        continue
                    if (st >> 2) & 3 == VALID and data[base + 4] == key_word:
                        v = data[base + 5]
                        if data[base] == h:
                            return (FOUND, v)
                        continue
                    if (st >> 4) & 3 == VALID and data[base + 6] == key_word:
                        v = data[base + 7]
                        if data[base] == h:
                            return (FOUND, v)
                        continue
                    if st >> 6 == 0:
                        return _NOT_FOUND_RESULT
                    r = self._find(idx, b, key_word, None, 0, _WANT_VALID)
                    if r[0] == _HIT:
                        return (FOUND, r[3])
                    if r[0] == _MISS:
                        return _NOT_FOUND_RESULT
                    break
            else:
                r = self._find(idx, b, key_word, key_bytes, ns, _WANT_VALID)
                if r[0] == _HIT:
                    return (FOUND, self._payload(r[3]))
                if r[0] == _MISS:
                    return _NOT_FOUND_RESULT
                bs = _IN_TRANSFER_BITS if r[0] == _WAIT else 0
            if bs == _IN_TRANSFER_BITS or data[base] & _BIN_STATE_BITS == _IN_TRANSFER_BITS:
                self._wait_bin(idx, base)
            idx = self._divert(cell, idx)

    def contains(self, key, namespace=None) -> bool:
        return self.get(key, namespace)[0] == FOUND

    def lookup(self, key, namespace=None):
        """Convenience: the payload directly, or None when absent."""
        status, payload = self.get(key, namespace)
        return payload if status == FOUND else None

    # -- insert ------------------------------------------------------------------

    def insert(self, key, value=None, namespace=None):
        """Insert; (INSERTED, None) or (ALREADY_PRESENT, current payload)."""
        return self._insert(key, value, namespace, VALID)

    def shadow_insert(self, key, value=None, namespace=None):
        """Insert hidden from get/put/delete: a lock on the key until
        finalized.  A second (shadow) insert of the key sees ALREADY_PRESENT."""
        return self._insert(key, value, namespace, SHADOW)

    def _insert(self, key, value, namespace, final_state):
        mode = self._mode
        if mode == MODE_ALLOC:
            self._check_bytes_key(key)
            ns = self._check_namespace(namespace)
            if not isinstance(value, (bytes, bytearray)):
                raise TypeError("allocator mode takes byte-string values")
            key_word = key_word_of(key)
            key_bytes = key
            value_word = None  # record allocated while the claim is held
            if self._epochs.enabled and not self._announce:
                self._tcell()
        elif mode == MODE_HASHSET:
            if namespace is not None:
                self._check_namespace(namespace)
            if value is not None:
                raise TableConfigError("hashset mode stores no values")
            self._check_word_key(key)
            key_word, key_bytes, ns, value_word = key, None, 0, 0
        else:
            if namespace is not None:
                self._check_namespace(namespace)
            self._check_word_key(key)
            if not isinstance(value, int) or not 0 <= value < (1 << 64):
                raise TypeError("inlined mode takes 64-bit unsigned integer values")
            key_word, key_bytes, ns, value_word = key, None, 0, value

        cell = self._enter() if self._announce else None
        try:
            return self._insert_core(
                cell, key, key_word, key_bytes, value, value_word, ns, final_state
            )
        finally:
            if cell is not None:
                self._exit(cell)

    def _insert_core(self, cell, key, key_word, key_bytes, value, value_word, ns, final_state):
        idx = cell.ref if cell is not None else self._current
        alloc = self._mode == MODE_ALLOC
        while True:
            b = self._bin_of(idx, key_word)
            base = b * BUCKET_WORDS
            data = idx.data
            words = idx.words

            r = self._find(idx, b, key_word, key_bytes, ns, _WANT_LIVE)
            kind = r[0]
            if kind == _WAIT:
                self._wait_bin(idx, base)
                idx = self._divert(cell, idx)
                continue
            if kind == _DIVERT:
                idx = self._divert(cell, idx)
                continue
            if kind == _HIT:
                return (ALREADY_PRESENT, self._payload(r[3]))

            _, h, first_inv = r
            if first_inv < 0:
                idx = self._grow(cell, idx, "bin_full")
                continue

            # claim: header CAS invalid -> try-insert
            if not words.cas(base, h, with_slot_state(h, first_inv, TRY_INSERT)):
                continue
            s = first_inv

            loc = idx.slot_word(b, s)
            if loc is UNCHAINED:
                if self._ensure_chain(idx, b, s) is EXHAUSTED:
                    if self._release_claim(idx, base, s):
                        idx = self._grow(cell, idx, "links_exhausted")
                    else:
                        idx = self._divert(cell, idx)
                    continue
                loc = idx.slot_word(b, s)

            if alloc:
                value_word = self._codec.store(key_bytes, value, ns)
            data[loc] = key_word
            data[loc + 1] = value_word

            # publish: header CAS try-insert -> valid/shadow; on failure,
            # restart from the top but keep the claim (skip claim steps)
            while True:
                h2 = data[base]
                bs = h2 & _BIN_STATE_BITS
                if bs:
                    # bin is transferring: abandon the claim (the old
                    # generation is on its way out) and retry on the new one
                    if alloc:
                        self._codec.release_word(value_word)
                    if bs == _IN_TRANSFER_BITS:
                        self._wait_bin(idx, base)
                    idx = self._divert(cell, idx)
                    break
                r = self._find(idx, b, key_word, key_bytes, ns, _WANT_LIVE)
                if r[0] == _HIT:
                    # lost the same-key race; free our claim and report
                    if alloc:
                        self._codec.release_word(value_word)
                    self._release_claim(idx, base, s)
                    return (ALREADY_PRESENT, self._payload(r[3]))
                if r[0] != _MISS:
                    continue  # bin state changed under us; loop re-reads
                h2 = r[1]
                if words.cas(base, h2, with_slot_state(h2, s, final_state)):
                    return (INSERTED, None)
            # reached only via the transfer-abandon break
            continue

    def _ensure_chain(self, idx: Index, b: int, s: int):
        """Chain the link bucket(s) covering slot ``s`` if still missing."""
        if s < 7:
            if idx.slot_word(b, s) is not UNCHAINED:
                return None
            got = idx.allocate_links(1)
            if got is EXHAUSTED:
                return EXHAUSTED
            idx.chain_links(b, "a", got)
        else:
            if idx.slot_word(b, s) is not UNCHAINED:
                return None
            got = idx.allocate_links(2)
            if got is EXHAUSTED:
                return EXHAUSTED
            idx.chain_links(b, "bc", got)
        return None

    def _release_claim(self, idx: Index, base: int, s: int) -> bool:
        """Return a try-insert claim to invalid; False when the bin started
        transferring (the claim is abandoned in the dying generation)."""
        data = idx.data
        words = idx.words
        while True:
            h = data[base]
            if h & _BIN_STATE_BITS:
                return False
            if words.cas(base, h, with_slot_state(h, s, INVALID)):
                return True

    def _reannounce(self, cell: _Cell | None) -> Index:
        """Repoint the thread's cell at the current generation."""
        if cell is None:
            return self._current
        cur = self._current
        cell.ref = cur
        while self._current is not cur:
            cur = self._current
            cell.ref = cur
        return cur

    def _grow(self, cell, idx: Index, cause: str) -> Index:
        """Trigger (or help) a resize, then re-announce on the new current."""
        self._resize.trigger(idx, cause)
        return self._reannounce(cell)

    # -- finalize shadow ----------------------------------------------------------

    def finalize_shadow(self, key, commit: bool, namespace=None):
        """Commit (publish) or abort (remove) a shadow-inserted key."""
        if self._mode == MODE_ALLOC:
            self._check_bytes_key(key)
            ns = self._check_namespace(namespace)
            key_word, key_bytes = key_word_of(key), key
            if self._epochs.enabled and not self._announce:
                self._tcell()
        else:
            if namespace is not None:
                self._check_namespace(namespace)
            self._check_word_key(key)
            key_word, key_bytes, ns = key, None, 0

        cell = self._enter() if self._announce else None
        try:
            idx = cell.ref if cell is not None else self._current
            target = VALID if commit else INVALID
            while True:
                b = self._bin_of(idx, key_word)
                r = self._find(idx, b, key_word, key_bytes, ns, _WANT_SHADOW)
                kind = r[0]
                if kind == _MISS:
                    return _NOT_FOUND_RESULT
                if kind == _WAIT:
                    self._wait_bin(idx, b * BUCKET_WORDS)
                    idx = self._divert(cell, idx)
                    continue
                if kind == _DIVERT:
                    idx = self._divert(cell, idx)
                    continue
                _, s, loc, vw, h = r
                if idx.words.cas(b * BUCKET_WORDS, h, with_slot_state(h, s, target)):
                    if not commit and self._mode == MODE_ALLOC:
                        self._epochs.retire(vw & ADDR_MASK)
                    return (DONE, None)
        finally:
            if cell is not None:
                self._exit(cell)

    # -- delete ---------------------------------------------------------------------

    def delete(self, key, namespace=None):
        """Remove the key: (DELETED, payload) or (NOT_FOUND, None).

        The slot is reusable by inserts the moment the CAS lands.  In
        allocator mode the record's address goes to the epoch reclaimer
        (when reclamation is enabled); the returned view stays readable
        through the grace period.
        """
        if self._mode == MODE_ALLOC:
            self._check_bytes_key(key)
            ns = self._check_namespace(namespace)
            key_word, key_bytes = key_word_of(key), key
            if self._epochs.enabled and not self._announce:
                self._tcell()
        else:
            if namespace is not None:
                self._check_namespace(namespace)
            self._check_word_key(key)
            key_word, key_bytes, ns = key, None, 0

        cell = self._enter() if self._announce else None
        try:
            idx = cell.ref if cell is not None else self._current
            while True:
                b = self._bin_of(idx, key_word)
                r = self._find(idx, b, key_word, key_bytes, ns, _WANT_VALID)
                kind = r[0]
                if kind == _MISS:
                    return _NOT_FOUND_RESULT
                if kind == _WAIT:
                    self._wait_bin(idx, b * BUCKET_WORDS)
                    idx = self._divert(cell, idx)
                    continue
                if kind == _DIVERT:
                    idx = self._divert(cell, idx)
                    continue
                _, s, loc, vw, h = r
                if idx.words.cas(b * BUCKET_WORDS, h, with_slot_state(h, s, INVALID)):
                    payload = self._payload(vw)
                    if self._mode == MODE_ALLOC:
                        self._epochs.retire(vw & ADDR_MASK)
                    return (DELETED, payload)
        finally:
            if cell is not None:
                self._exit(cell)

    # -- put ---------------------------------------------------------------------------

    def put(self, key, new_value):
        """Replace the value of an existing key with one double-width CAS.

        Inlined mode only: (UPDATED, old value) or (NOT_FOUND, None).
        """
        if self._mode != MODE_INLINED:
            raise TableConfigError(
                "put is only available in inlined mode (use the record view "
                "to modify allocator-mode values)"
            )
        self._check_word_key(key)
        if not isinstance(new_value, int) or not 0 <= new_value < (1 << 64):
            raise TypeError("inlined mode takes 64-bit unsigned integer values")

        cell = self._enter() if self._announce else None
        try:
            idx = cell.ref if cell is not None else self._current
            while True:
                b = self._bin_of(idx, key)
                r = self._find(idx, b, key, None, 0, _WANT_VALID)
                kind = r[0]
                if kind == _MISS:
                    return _NOT_FOUND_RESULT
                if kind == _WAIT:
                    self._wait_bin(idx, b * BUCKET_WORDS)
                    idx = self._divert(cell, idx)
                    continue
                if kind == _DIVERT:
                    idx = self._divert(cell, idx)
                    continue
                _, s, loc, old, h = r
                if idx.words.dwcas(loc, key, old, key, new_value):
                    return (UPDATED, old)
                # slot changed under us: deleted, reused, or marked with a
                # transfer key — restart; the header check above routes the
                # transfer cases to the new index
        finally:
            if cell is not None:
                self._exit(cell)

    # -- epoch reclamation -----------------------------------------------------------------

    def advance_epoch(self) -> int:
        """Publish the calling thread at the current reclamation epoch.

        Allocator mode with reclamation enabled; must be called
        periodically from every registered thread for retired records to
        be released.  Do not call while record views from before the call
        are still in use.
        """
        if self._epochs is None:
            raise TableConfigError("epoch reclamation needs allocator mode")
        return self._epochs.advance(self._tcell().tid)

    # -- batching / iteration (implemented in the batch module) ------------------------------

    def execute_batch(self, requests, stop_on_failure: bool = False):
        return _batch.execute_batch(self, requests, stop_on_failure)

    def prefetch_key(self, key) -> None:
        _batch.prefetch_key(self, key)

    def iterate_weak(self, visitor) -> int:
        return _batch.iterate_weak(self, visitor)

    # -- introspection -------------------------------------------------------------------------

    @property
    def current_index(self) -> Index:
        return self._current

    @property
    def resize_events(self):
        return self._resize.events

    @property
    def resize_count(self) -> int:
        return len(self._resize.events)

    def occupancy(self) -> float:
        """Live slots over total slots of the current generation
        (approximate under concurrency; exact when quiescent)."""
        idx = self._current
        return idx.live_count() / idx.total_slots()

    def stats(self) -> dict:
        idx = self._current
        return {
            "nbins": idx.nbins,
            "nlinks": idx.nlinks,
            "links_used": min(idx.link_cursor.load(), idx.nlinks),
            "generation": idx.generation,
            "resizes": self.resize_count,
            "live": idx.live_count(),
            "total_slots": idx.total_slots(),
        }


from . import batch as _batch  # noqa: E402  (cycle-free: batch imports no table names)
