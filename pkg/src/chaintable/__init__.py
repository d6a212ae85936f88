"""chaintable: a concurrent in-memory hash table built on bounded
cache-line chaining, with lock-free operations, deletes that free slots
instantly, a cooperative non-blocking resize, ordered request batching,
and three operating modes (inlined, allocator, hashset)."""

from .batch import execute_batch, iterate_weak, prefetch_key
from .hashing import HashKind, bin_of, mix64, mix_bytes
from .index import Index, RESERVED_KEY_FLOOR
from .records import ArenaAllocator, RecordView
from .resize import growth_factor
from .results import (
    ALREADY_PRESENT,
    DELETED,
    DONE,
    FOUND,
    INSERTED,
    NOT_EXECUTED,
    NOT_FOUND,
    UPDATED,
    BatchOutcome,
    BatchRequest,
    CapacityError,
    OP_DELETE,
    OP_FINALIZE_ABORT,
    OP_FINALIZE_COMMIT,
    OP_GET,
    OP_INSERT,
    OP_PUT,
    OP_SHADOW_INSERT,
    STATUS_NAMES,
    TableConfigError,
)
from .table import MODE_ALLOC, MODE_HASHSET, MODE_INLINED, TableConfig, TableHandle

__version__ = "0.1.0"

__all__ = [
    "TableConfig",
    "TableHandle",
    "BatchRequest",
    "BatchOutcome",
    "ArenaAllocator",
    "RecordView",
    "Index",
    "HashKind",
    "execute_batch",
    "prefetch_key",
    "iterate_weak",
    "bin_of",
    "mix64",
    "mix_bytes",
    "growth_factor",
    "FOUND",
    "NOT_FOUND",
    "INSERTED",
    "ALREADY_PRESENT",
    "DELETED",
    "UPDATED",
    "DONE",
    "NOT_EXECUTED",
    "OP_GET",
    "OP_PUT",
    "OP_INSERT",
    "OP_SHADOW_INSERT",
    "OP_DELETE",
    "OP_FINALIZE_COMMIT",
    "OP_FINALIZE_ABORT",
    "STATUS_NAMES",
    "TableConfigError",
    "CapacityError",
    "RESERVED_KEY_FLOOR",
    "MODE_INLINED",
    "MODE_ALLOC",
    "MODE_HASHSET",
]
