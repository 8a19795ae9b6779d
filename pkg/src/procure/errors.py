"""Exception types shared across the pipeline."""

from __future__ import annotations


class ProcureError(Exception):
    """Base class for all package-specific errors."""


class MissingEntryPoint(ProcureError):
    def __init__(self, entry_point: str):
        super().__init__(f"entry point {entry_point!r} is not defined at module level")
        self.entry_point = entry_point


class UnsupportedConstruct(ProcureError):
    """Raised when a program uses syntax outside the analyzable subset."""

    def __init__(self, kind: str, lineno: int | None = None):
        loc = f" at line {lineno}" if lineno is not None else ""
        super().__init__(f"unsupported construct {kind}{loc}")
        self.kind = kind
        self.lineno = lineno


class NotApplicable(ProcureError):
    """A perturbation site does not (or no longer does) fit the program."""


class SandboxUnavailable(ProcureError):
    """The configured test interpreter cannot be executed."""


class TransportError(ProcureError):
    """The generation backend could not be reached or answered abnormally."""


class MalformedResponse(ProcureError):
    """A backend response contained no usable code."""


class SchemaError(ProcureError):
    def __init__(self, line: int, field: str, reason: str = ""):
        detail = f": {reason}" if reason else ""
        super().__init__(f"record on line {line} has invalid field {field!r}{detail}")
        self.line = line
        self.field = field


class OrphanCounterfactual(ProcureError):
    def __init__(self, task_id: str):
        super().__init__(f"counterfactual references unknown task {task_id!r}")
        self.task_id = task_id


class GroupTooLarge(ProcureError):
    """A combined group cannot fit into a single batch."""


class DomainError(ProcureError):
    """An estimator was called outside its mathematical domain."""
