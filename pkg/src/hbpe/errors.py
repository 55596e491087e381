"""Exception type shared by every hbpe module.

Errors carry a stable machine-readable code of the form "<module>.<what>"
so callers (notably the CLI) can report which module failed without string
matching on messages.
"""

from __future__ import annotations


class HbpeError(ValueError):
    """A toolkit error with a stable code.

    kind is one of "data" (bad values, malformed artifacts), "io" (file
    level trouble) or "usage" (caller misuse); the CLI maps kinds to exit
    codes.
    """

    def __init__(self, code: str, message: str, kind: str = "data"):
        super().__init__(message)
        self.code = code
        self.kind = kind

    @property
    def module(self) -> str:
        return self.code.split(".", 1)[0]

    def __str__(self) -> str:
        return f"[{self.code}] {super().__str__()}"
