"""Shared error types."""


class RejectedOp(Exception):
    """An operation whose precondition does not hold; names op and reason."""

    def __init__(self, op: str, reason: str):
        super().__init__(f"{op}: {reason}")
        self.op = op
        self.reason = reason


class RejectedSchedule(Exception):
    """A parameter schedule violating a required inequality chain."""

    def __init__(self, constraint: str):
        super().__init__(constraint)
        self.constraint = constraint
