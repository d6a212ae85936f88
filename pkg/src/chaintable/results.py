"""Operation result statuses, batch request/outcome types, and errors.

Operations return ``(status, payload)`` tuples.  Statuses are plain ints
so hot loops can compare cheaply; payloads depend on the table mode
(inlined value word, record view, or None for the key-only mode).
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "FOUND",
    "NOT_FOUND",
    "INSERTED",
    "ALREADY_PRESENT",
    "DELETED",
    "UPDATED",
    "DONE",
    "NOT_EXECUTED",
    "STATUS_NAMES",
    "OP_GET",
    "OP_PUT",
    "OP_INSERT",
    "OP_SHADOW_INSERT",
    "OP_DELETE",
    "OP_FINALIZE_COMMIT",
    "OP_FINALIZE_ABORT",
    "OP_NAMES",
    "BatchRequest",
    "BatchOutcome",
    "TableConfigError",
    "CapacityError",
]

FOUND = 0
NOT_FOUND = 1
INSERTED = 2
ALREADY_PRESENT = 3
DELETED = 4
UPDATED = 5
DONE = 6
NOT_EXECUTED = 7

STATUS_NAMES = (
    "found",
    "not_found",
    "inserted",
    "already_present",
    "deleted",
    "updated",
    "done",
    "not_executed",
)

OP_GET = 0
OP_PUT = 1
OP_INSERT = 2
OP_SHADOW_INSERT = 3
OP_DELETE = 4
OP_FINALIZE_COMMIT = 5
OP_FINALIZE_ABORT = 6

OP_NAMES = (
    "get",
    "put",
    "insert",
    "shadow_insert",
    "delete",
    "finalize_commit",
    "finalize_abort",
)

# statuses that count as "did not complete successfully" per operation,
# used by stop-on-failure batches
FAILURE_STATUS = {
    OP_GET: NOT_FOUND,
    OP_PUT: NOT_FOUND,
    OP_INSERT: ALREADY_PRESENT,
    OP_SHADOW_INSERT: ALREADY_PRESENT,
    OP_DELETE: NOT_FOUND,
    OP_FINALIZE_COMMIT: NOT_FOUND,
    OP_FINALIZE_ABORT: NOT_FOUND,
}


class TableConfigError(RuntimeError):
    """A request is invalid for the table's mode or configuration."""


class CapacityError(RuntimeError):
    """The index cannot grow (resizing disabled or size cap reached)."""


@dataclass(slots=True)
class BatchRequest:
    """One element of an ordered mixed-operation batch."""

    op: int
    key: object
    value: object = None
    namespace: object = None


@dataclass(slots=True)
class BatchOutcome:
    """Per-request results of a batch, aligned with the request array."""

    statuses: list = field(default_factory=list)
    values: list = field(default_factory=list)
    executed_count: int = 0
    success: bool = True

    def results(self) -> list[tuple]:
        return list(zip(self.statuses, self.values))
