"""Strict field access over decoded JSON objects.

Every accessor records the key it consumed; ``done()`` rejects whatever
was not consumed, so unknown keys never slip through silently.
"""

from __future__ import annotations

import json
import math
from typing import Any, Iterable

from mlsds.findings import ParseError

SCHEMA_VERSION = "1"
_MISSING = object()


def load_json(text: str | bytes, path: str = "") -> Any:
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8 at byte {exc.start}", path) from None
    try:
        return json.loads(text, object_pairs_hook=_no_duplicates)
    except json.JSONDecodeError as exc:
        raise ParseError(f"syntax error: {exc.msg}", path, exc.lineno, exc.colno) from None
    except _DuplicateKey as exc:
        raise ParseError(f"duplicate key {exc.args[0]!r}", path) from None
    except RecursionError:
        raise ParseError("document nested too deeply", path) from None


class _DuplicateKey(Exception):
    pass


def _no_duplicates(pairs: list[tuple[str, Any]]) -> dict[str, Any]:
    out: dict[str, Any] = {}
    for key, value in pairs:
        if key in out:
            raise _DuplicateKey(key)
        out[key] = value
    return out


def join(path: str, key: str | int) -> str:
    if isinstance(key, int):
        return f"{path}[{key}]"
    return f"{path}.{key}" if path else key


def check_enum(value: str, allowed: Iterable[str], path: str, open_ended: bool = False) -> str:
    """Accept one of ``allowed``; with ``open_ended``, also ``other:<text>``."""
    allowed = tuple(allowed)
    if value in allowed:
        return value
    if open_ended and value.startswith("other:") and value[len("other:"):].strip():
        return value
    options = ", ".join(allowed) + (", other:<text>" if open_ended else "")
    raise ParseError(f"invalid value {value!r}; expected one of {options}", path)


class Reader:
    def __init__(self, obj: Any, path: str = ""):
        if not isinstance(obj, dict):
            raise ParseError(f"expected an object, got {_kind(obj)}", path or "<root>")
        self.obj = obj
        self.path = path
        self._seen: set[str] = set()

    def _get(self, key: str, optional: bool) -> Any:
        self._seen.add(key)
        if key not in self.obj:
            if optional:
                return _MISSING
            raise ParseError("missing required field", join(self.path, key))
        return self.obj[key]

    def at(self, key: str) -> str:
        return join(self.path, key)

    def has(self, key: str) -> bool:
        return key in self.obj

    def text(self, key: str, nonempty: bool = False) -> str:
        value = self._get(key, False)
        if not isinstance(value, str):
            raise ParseError(f"expected text, got {_kind(value)}", self.at(key))
        if nonempty and not value.strip():
            raise ParseError("must not be empty", self.at(key))
        return value

    def optional_text(self, key: str) -> str | None:
        if self._get(key, True) in (_MISSING, None):
            return None
        return self.text(key)

    def number(self, key: str, minimum: float | None = None, strict: bool = False) -> float:
        value = self._get(key, False)
        return as_number(value, self.at(key), minimum, strict)

    def integer(self, key: str, minimum: int | None = None) -> int:
        value = self._get(key, False)
        if isinstance(value, bool) or not isinstance(value, int):
            raise ParseError(f"expected an integer, got {_kind(value)}", self.at(key))
        if minimum is not None and value < minimum:
            raise ParseError(f"must be >= {minimum}, got {value}", self.at(key))
        return value

    def boolean(self, key: str) -> bool:
        value = self._get(key, False)
        if not isinstance(value, bool):
            raise ParseError(f"expected true or false, got {_kind(value)}", self.at(key))
        return value

    def optional_boolean(self, key: str) -> bool | None:
        if self._get(key, True) in (_MISSING, None):
            return None
        return self.boolean(key)

    def text_list(self, key: str) -> tuple[str, ...]:
        items = self.list(key)
        out = []
        for i, item in enumerate(items):
            if not isinstance(item, str):
                raise ParseError(f"expected text, got {_kind(item)}", join(self.at(key), i))
            out.append(item)
        return tuple(out)

    def list(self, key: str) -> list:
        value = self._get(key, False)
        if not isinstance(value, list):
            raise ParseError(f"expected a list, got {_kind(value)}", self.at(key))
        return value

    def child(self, key: str) -> "Reader":
        return Reader(self._get(key, False), self.at(key))

    def optional_child(self, key: str) -> "Reader | None":
        value = self._get(key, True)
        if value is _MISSING or value is None:
            return None
        return Reader(value, self.at(key))

    def raw(self, key: str, optional: bool = False) -> Any:
        value = self._get(key, optional)
        return None if value is _MISSING else value

    def done(self) -> None:
        unknown = sorted(set(self.obj) - self._seen)
        if unknown:
            raise ParseError(f"unknown key {unknown[0]!r}", join(self.path, unknown[0]))


def as_number(value: Any, path: str, minimum: float | None = None, strict: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"expected a number, got {_kind(value)}", path)
    value = float(value)
    if not math.isfinite(value):
        raise ParseError("must be finite", path)
    if minimum is not None:
        if strict and value <= minimum:
            raise ParseError(f"must be > {minimum:g}, got {value:g}", path)
        if not strict and value < minimum:
            raise ParseError(f"must be >= {minimum:g}, got {value:g}", path)
    return value


def check_version(reader: Reader) -> None:
    version = reader.raw("schema_version")
    if version != SCHEMA_VERSION:
        raise ParseError(
            f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION!r}",
            reader.at("schema_version"),
        )


def _kind(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "boolean"
    if isinstance(value, (int, float)):
        return "number"
    if isinstance(value, str):
        return "text"
    if isinstance(value, list):
        return "list"
    if isinstance(value, dict):
        return "object"
    return type(value).__name__
