"""Emulated atomic primitives over a flat 64-bit word array.

CPython has no user-level compare-and-swap, so the machine primitives the
index algorithms are written against (64-bit CAS, double-width CAS on a
16-byte slot, fetch-and-add) are emulated here with striped locks.  Plain
loads and stores of single ``array('Q')`` items are already atomic under
the GIL and go straight to the array; only the read-modify-write
primitives take a lock.  The locks are striped per 64-byte bucket, so a
header CAS and a slot dw-CAS inside the same bucket serialize (harmless)
while operations on different buckets almost never contend.

``PlainWords`` is the single-thread variant: the same interface with every
compare-and-swap downgraded to an unlocked read-modify-write, which is
what the single-thread table mode plugs in.

Multi-word reads can still tear (two loads are two bytecodes); the table
algorithms are designed for that and validate via the header version.
"""

from __future__ import annotations

import threading
from array import array

__all__ = ["AtomicWords", "PlainWords", "AtomicCounter", "AtomicCell"]

_NSTRIPES = 64


class _Poisoned:
    """Placeholder installed when an index generation is retired.

    Any later access through the retired generation is a reclamation bug;
    failing loudly here is the Python stand-in for a use-after-free
    sanitizer report.
    """

    __slots__ = ()

    def _die(self, *a):
        raise RuntimeError("access to a retired index generation (use-after-reclaim)")

    __getitem__ = _die
    __setitem__ = _die
    __len__ = _die


class AtomicWords:
    """A fixed-size vector of 64-bit words with CAS/dw-CAS emulation."""

    __slots__ = ("data", "_locks")

    def __init__(self, data: array):
        assert data.itemsize == 8
        self.data = data
        self._locks = [threading.Lock() for _ in range(_NSTRIPES)]

    def __len__(self) -> int:
        return len(self.data)

    def load(self, i: int) -> int:
        return self.data[i]

    def store(self, i: int, value: int) -> None:
        self.data[i] = value

    def cas(self, i: int, expected: int, new: int) -> bool:
        """Single-word compare-and-swap; True when the swap happened."""
        lock = self._locks[(i >> 3) & (_NSTRIPES - 1)]
        data = self.data
        with lock:
            if data[i] != expected:
                return False
            data[i] = new
            return True

    def dwcas(self, i: int, exp0: int, exp1: int, new0: int, new1: int) -> bool:
        """Double-width CAS over words i and i+1 (one 16-byte slot)."""
        lock = self._locks[(i >> 3) & (_NSTRIPES - 1)]
        data = self.data
        with lock:
            if data[i] != exp0 or data[i + 1] != exp1:
                return False
            data[i] = new0
            data[i + 1] = new1
            return True

    def poison(self) -> None:
        """Drop the backing storage and trap all further access."""
        self.data = _Poisoned()


class PlainWords(AtomicWords):
    """Single-thread variant: CASes become regular read-modify-writes."""

    __slots__ = ()

    def __init__(self, data: array):
        # no locks; the caller promises a single accessing thread
        self.data = data
        self._locks = None

    def cas(self, i: int, expected: int, new: int) -> bool:
        data = self.data
        if data[i] != expected:
            return False
        data[i] = new
        return True

    def dwcas(self, i: int, exp0: int, exp1: int, new0: int, new1: int) -> bool:
        data = self.data
        if data[i] != exp0 or data[i + 1] != exp1:
            return False
        data[i] = new0
        data[i + 1] = new1
        return True


class AtomicCounter:
    """Shared counter with atomic fetch-and-add."""

    __slots__ = ("_value", "_lock")

    def __init__(self, value: int = 0, locked: bool = True):
        self._value = value
        self._lock = threading.Lock() if locked else None

    def fetch_add(self, delta: int = 1) -> int:
        lock = self._lock
        if lock is None:
            prior = self._value
            self._value = prior + delta
            return prior
        with lock:
            prior = self._value
            self._value = prior + delta
            return prior

    def load(self) -> int:
        return self._value

    def store(self, value: int) -> None:
        self._value = value


class AtomicCell:
    """Shared reference cell with compare-and-swap."""

    __slots__ = ("_value", "_lock")

    def __init__(self, value=None):
        self._value = value
        self._lock = threading.Lock()

    def load(self):
        return self._value

    def store(self, value) -> None:
        self._value = value

    def cas(self, expected, new) -> bool:
        with self._lock:
            if self._value != expected:
                return False
            self._value = new
            return True
