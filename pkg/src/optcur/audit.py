"""Allocation audit for the input-sparsity code paths.

The sparse CUR pipeline promises never to materialize a dense m x n
intermediate.  Rather than trying to intercept every numpy allocation, the
pipeline routes its dense intermediates through :func:`note_dense`, and
``SparseMatrix.to_dense`` reports itself the same way.  Tests activate the
audit with :func:`forbid_dense`; outside an active audit all notes are no-ops.
"""

import contextlib
import threading

_state = threading.local()


class DenseMaterializationError(AssertionError):
    """A dense intermediate at or above the audited size was created."""


def note_dense(n_elements):
    """Record creation of a dense buffer with ``n_elements`` entries."""
    limit = getattr(_state, "limit", None)
    if limit is not None and n_elements >= limit:
        raise DenseMaterializationError(
            "dense intermediate with %d elements >= audit limit %d"
            % (n_elements, limit)
        )


@contextlib.contextmanager
def forbid_dense(limit_elements):
    """Fail if any noted dense buffer has >= ``limit_elements`` entries."""
    prev = getattr(_state, "limit", None)
    _state.limit = int(limit_elements)
    try:
        yield
    finally:
        _state.limit = prev
