"""Exception hierarchy shared across the package.

InputError marks problems in user-supplied data or configuration; the CLI
maps it to exit code 1 and everything else to exit code 2.
"""

from __future__ import annotations


class InputError(ValueError):
    """Bad user-supplied data, file, or configuration."""


class ParseError(InputError):
    """A malformed record in an input stream, with its 1-based line number."""

    def __init__(self, line: int, message: str):
        self.line = line
        self.message = message
        super().__init__(f"line {line}: {message}")
