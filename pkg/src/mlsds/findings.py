"""Validation findings and the exception types shared by every module.

Validators return findings as data; parsers and numeric kernels raise.
Each exception carries a field path so the CLI can turn it into a finding.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable

ERROR = "error"
WARNING = "warning"


@dataclass(frozen=True, order=True)
class Finding:
    severity: str
    path: str
    message: str

    def to_dict(self) -> dict[str, str]:
        return {"severity": self.severity, "path": self.path, "message": self.message}

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


class ValidationReport:
    """An unordered set of findings; iteration order is canonical (sorted)."""

    def __init__(self, findings: Iterable[Finding] = ()):
        self._findings = tuple(sorted(set(findings)))

    @property
    def findings(self) -> tuple[Finding, ...]:
        return self._findings

    @property
    def errors(self) -> tuple[Finding, ...]:
        return tuple(f for f in self._findings if f.severity == ERROR)

    @property
    def warnings(self) -> tuple[Finding, ...]:
        return tuple(f for f in self._findings if f.severity == WARNING)

    @property
    def valid(self) -> bool:
        return not self.errors

    def strict(self) -> "ValidationReport":
        """Return a copy with every warning promoted to an error."""
        return ValidationReport(Finding(ERROR, f.path, f.message) for f in self._findings)

    def prefixed(self, prefix: str) -> "ValidationReport":
        return ValidationReport(
            Finding(f.severity, f"{prefix}.{f.path}" if f.path else prefix, f.message)
            for f in self._findings
        )

    def __add__(self, other: "ValidationReport") -> "ValidationReport":
        return ValidationReport(self._findings + other._findings)

    def __iter__(self):
        return iter(self._findings)

    def __len__(self) -> int:
        return len(self._findings)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ValidationReport) and self._findings == other._findings

    def __hash__(self) -> int:
        return hash(self._findings)

    def __repr__(self) -> str:
        return f"ValidationReport({list(self._findings)!r})"

    def to_json(self) -> str:
        return json.dumps([f.to_dict() for f in self._findings], indent=2) + "\n"


def error(path: str, message: str) -> Finding:
    return Finding(ERROR, path, message)


def warning(path: str, message: str) -> Finding:
    return Finding(WARNING, path, message)


class DatasheetError(Exception):
    """Base class. ``path`` names the offending field or file."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.message = message
        self.path = path

    def findings(self) -> list[Finding]:
        return [error(self.path, self.message)]


class ParseError(DatasheetError):
    """Malformed input: syntax error, missing field, type mismatch, broken invariant."""

    def __init__(self, message: str, path: str = "", line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message, path)
        self.line = line
        self.column = column


class RangeError(DatasheetError, ValueError):
    pass


class DegenerateClassError(DatasheetError, ValueError):
    pass


class InsufficientStrataError(DatasheetError, ValueError):
    pass


class MissingSectionError(DatasheetError):
    def __init__(self, section: str):
        super().__init__("required section missing", section)
        self.section = section


class ValidationFailed(DatasheetError):
    """Raised by assembly when any error-severity finding exists."""

    def __init__(self, report: ValidationReport):
        lines = "; ".join(str(f) for f in report.errors)
        super().__init__(f"validation failed: {lines}")
        self.report = report

    def findings(self) -> list[Finding]:
        return list(self.report)
