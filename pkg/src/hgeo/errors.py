from __future__ import annotations


class RejectedInput(ValueError):
    """Raised when an operation's precondition is violated."""


class NonConvergence(RuntimeError):
    """Raised by callers that require a converged solve."""
