"""Exception hierarchy shared by every module.

Each error carries a machine-readable ``reason`` dict so the CLI can emit it
verbatim; the class decides the exit status.
"""

from __future__ import annotations


class LatticeToolError(Exception):
    """Base class. ``reason`` is JSON-serialisable."""

    exit_code = 1

    def __init__(self, message: str, **reason):
        super().__init__(message)
        self.reason = {"error": type(self).__name__, "message": message, **reason}


class InputError(LatticeToolError, ValueError):
    """Malformed input: bad permutation, degree mismatch, element outside a group."""

    exit_code = 2


class PreconditionError(InputError):
    """An operation's mathematical precondition does not hold for the given input."""


class ResourceError(LatticeToolError):
    """An enumeration budget was exceeded; shrink the instance or raise the budget."""

    exit_code = 3


class PropertyViolation(LatticeToolError):
    """A checked identity failed on a concrete input."""

    exit_code = 1


class TruncationArtefact(PropertyViolation):
    """A check failed in a way attributable to the finite depth of the model."""


class InternalInconsistency(PropertyViolation):
    """Two routes that must agree by a proved identity disagreed (indicates a bug)."""


class HypothesisRejected(PropertyViolation):
    """Input rejected because a construction hypothesis fails; ``witness`` names it."""
