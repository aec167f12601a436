"""Human-readable ``key = value`` files.

One entry per line, ``#`` starts a comment, blank lines ignored.  Keys may be
dotted (``clock.left.offset``).  Values are stored as text; typed access is
the caller's job.  Writes are atomic (temp file + rename) so concurrent
readers never observe a partial file.
"""

from __future__ import annotations

import os
from pathlib import Path

from ..errors import InputIOError, SchemaError


def atomic_write_bytes(path: Path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def atomic_write_text(path: Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def parse_kv_lines(lines, origin: str = "<kv>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"{origin}:{lineno}: expected 'key = value', got {raw.rstrip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise SchemaError(f"{origin}:{lineno}: empty key")
        if key in out:
            raise SchemaError(f"{origin}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read_kv(path: Path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise InputIOError(f"missing file: {path}")
    with open(path, "r", encoding="utf-8") as fh:
        return parse_kv_lines(fh, origin=str(path))


def format_kv(entries: dict[str, str]) -> str:
    return "".join(f"{k} = {v}\n" for k, v in entries.items())


def write_kv(path: Path, entries: dict[str, str]) -> None:
    atomic_write_text(path, format_kv(entries))
