"""Bit-level codecs for the three packed 64-bit control words of the index.

Every bin is synchronized through a single 64-bit header word so that one
compare-and-swap can atomically change a slot state, the bin state, and the
version together.  The layout is frozen (golden-value tests pin it):

    header word
        bits  0-31   version (wraps mod 2^32, +1 on every mutation)
        bits 32-33   bin state
        bits 34-63   fifteen 2-bit slot states, slot i at bits 34+2i

    link meta word
        bits  0-31   first link-bucket index  (``link_a``)
        bits 32-63   second link-bucket index (``link_bc``, names a pair of
                     consecutive arena buckets); 0xFFFFFFFF means unlinked

    tagged value word (out-of-line storage mode)
        bits  0-47   storage address
        bits 48-59   namespace id (0..4095)
        bits 60-63   inlined-key length in bytes (1..8), 0 = key stored
                     out of line

A zero-filled header decodes to (version 0, NO_TRANSFER, 15x INVALID), so
index memory can be used straight from a zeroed allocation.  Link meta has
no such property: its empty value is all-ones, written at construction.

All functions here are pure; concurrency lives elsewhere.
"""

from __future__ import annotations

import enum

__all__ = [
    "SlotState",
    "BinState",
    "INVALID",
    "TRY_INSERT",
    "VALID",
    "SHADOW",
    "NO_TRANSFER",
    "IN_TRANSFER",
    "DONE_TRANSFER",
    "RESERVED",
    "UNLINKED",
    "NSLOTS",
    "VERSION_MASK",
    "BIN_STATE_SHIFT",
    "BIN_STATE_MASK",
    "SLOT_BASE_SHIFT",
    "ADDR_BITS",
    "ADDR_MASK",
    "NS_SHIFT",
    "NS_MASK",
    "KEYSIZE_SHIFT",
    "pack_header",
    "unpack_header",
    "slot_state_of",
    "bin_state_of",
    "version_of",
    "with_slot_state",
    "with_bin_state",
    "pack_link_meta",
    "unpack_link_meta",
    "tag_address",
    "untag_address",
]


class SlotState(enum.IntEnum):
    INVALID = 0      # free slot; the all-zeros encoding
    TRY_INSERT = 1   # claimed by an inserter, slot words being written
    VALID = 2        # published key-value pair
    SHADOW = 3       # inserted but hidden: a lock held by a transaction


class BinState(enum.IntEnum):
    NO_TRANSFER = 0    # initial state; normal operation
    IN_TRANSFER = 1    # this bin is being moved to the next index generation
    DONE_TRANSFER = 2  # moved; operations go to the new index
    RESERVED = 3       # never produced (held for snapshot migration)


# plain-int aliases for hot paths (IntEnum attribute access is slow in loops)
INVALID = 0
TRY_INSERT = 1
VALID = 2
SHADOW = 3
NO_TRANSFER = 0
IN_TRANSFER = 1
DONE_TRANSFER = 2
RESERVED = 3

NSLOTS = 15
UNLINKED = 0xFFFFFFFF

VERSION_MASK = 0xFFFFFFFF
_HIGH_MASK = 0xFFFFFFFF00000000
BIN_STATE_SHIFT = 32
BIN_STATE_MASK = 0x3_00000000  # bin state bits in place
SLOT_BASE_SHIFT = 34

_WORD_MASK = 0xFFFFFFFFFFFFFFFF

ADDR_BITS = 48
ADDR_MASK = (1 << ADDR_BITS) - 1
NS_SHIFT = 48
NS_MASK = 0xFFF
KEYSIZE_SHIFT = 60


def pack_header(version: int, bin_state: int, slot_states) -> int:
    """Pack (version, bin state, 15 slot states) into one header word."""
    assert 0 <= version <= VERSION_MASK
    assert len(slot_states) == NSLOTS
    w = version | ((bin_state & 3) << BIN_STATE_SHIFT)
    shift = SLOT_BASE_SHIFT
    for s in slot_states:
        w |= (s & 3) << shift
        shift += 2
    return w


def unpack_header(w: int) -> tuple[int, BinState, tuple[SlotState, ...]]:
    """Inverse of :func:`pack_header`."""
    version = w & VERSION_MASK
    bin_state = BinState((w >> BIN_STATE_SHIFT) & 3)
    states = tuple(
        SlotState((w >> (SLOT_BASE_SHIFT + 2 * i)) & 3) for i in range(NSLOTS)
    )
    return version, bin_state, states


def slot_state_of(w: int, slot: int) -> int:
    return (w >> (SLOT_BASE_SHIFT + 2 * slot)) & 3


def bin_state_of(w: int) -> int:
    return (w >> BIN_STATE_SHIFT) & 3


def version_of(w: int) -> int:
    return w & VERSION_MASK


def with_slot_state(w: int, slot: int, state: int) -> int:
    """Header with ``slot``'s state replaced and the version bumped by one.

    Every mutation goes through here (or :func:`with_bin_state`), so the
    version moves by exactly +1 mod 2^32 per compare-and-swap, which both
    drives the optimistic read protocol and defuses ABA on the header.
    """
    assert 0 <= slot < NSLOTS, slot
    shift = SLOT_BASE_SHIFT + 2 * slot
    high = (w & ~(3 << shift) & ~VERSION_MASK) | ((state & 3) << shift)
    return high | ((w + 1) & VERSION_MASK)


def with_bin_state(w: int, state: int) -> int:
    """Header with the bin state replaced and the version bumped by one."""
    high = (w & ~BIN_STATE_MASK & ~VERSION_MASK) | ((state & 3) << BIN_STATE_SHIFT)
    return high | ((w + 1) & VERSION_MASK)


def pack_link_meta(link_a: int, link_bc: int) -> int:
    """Pack the two 32-bit link-bucket indexes into one word."""
    return (link_bc << 32) | link_a


def unpack_link_meta(w: int) -> tuple[int, int]:
    return w & 0xFFFFFFFF, w >> 32


def tag_address(addr: int, key_size: int, namespace: int) -> int:
    """Overload the 16 unused MSBs of a 48-bit storage address.

    ``key_size`` is the inlined key length (1..8) or 0 when the key lives
    out of line; ``namespace`` disambiguates identical keys from different
    client namespaces.
    """
    if addr > ADDR_MASK or addr < 0:
        raise ValueError(f"storage address {addr:#x} does not fit in {ADDR_BITS} bits")
    assert 0 <= key_size <= 15
    assert 0 <= namespace <= NS_MASK
    return (key_size << KEYSIZE_SHIFT) | (namespace << NS_SHIFT) | addr


def untag_address(w: int) -> tuple[int, int, int]:
    """Inverse of :func:`tag_address`: (addr, key_size, namespace)."""
    return w & ADDR_MASK, w >> KEYSIZE_SHIFT, (w >> NS_SHIFT) & NS_MASK
