"""Small shared helpers: space-like bytes, word counting, atomic writes."""

from __future__ import annotations

import os
import re
import tempfile

# Bytes treated as whitespace throughout the toolkit: space, tab, LF, CR.
SPACE_LIKE = frozenset({0x20, 0x09, 0x0A, 0x0D})

_NONSPACE_RUN = re.compile(rb"[^ \t\n\r]+")
_RUN_SPLIT = re.compile(rb"[ \t\n\r]+|[^ \t\n\r]+")


def count_words(data: bytes) -> int:
    """Number of maximal non-space byte runs."""
    return sum(1 for _ in _NONSPACE_RUN.finditer(data))


def split_space_runs(data: bytes) -> list[bytes]:
    """Split into maximal runs of space-like or non-space bytes, in order.

    The concatenation of the returned runs is exactly the input.
    """
    return [m.group(0) for m in _RUN_SPLIT.finditer(data)]


def atomic_write_bytes(path: str | os.PathLike, data: bytes) -> None:
    """Write via a temp file in the same directory, then rename.

    A failed run never leaves a truncated artifact at the target path.
    """
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".hbpe-tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def atomic_write_text(path: str | os.PathLike, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))
