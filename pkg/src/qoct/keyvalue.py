"""Line-based ``[section]`` / ``key = value`` text format.

Unlike :mod:`configparser`, sections may repeat (``[layer]`` blocks) and
their order is kept. ``#`` and ``;`` start comments.
"""

from __future__ import annotations

import hashlib


class FormatError(ValueError):
    """Malformed or semantically invalid key/value text."""


def parse(text: str) -> list[tuple[str, dict[str, str]]]:
    """Return ``[(section_name, {key: raw_value}), ...]`` in file order."""
    sections: list[tuple[str, dict[str, str]]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]") or len(line) < 3:
                raise FormatError(f"line {lineno}: bad section header {raw!r}")
            sections.append((line[1:-1].strip().lower(), {}))
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise FormatError(f"line {lineno}: expected 'key = value', got {raw!r}")
        if not sections:
            raise FormatError(f"line {lineno}: key outside of any section")
        key = key.strip().lower()
        body = sections[-1][1]
        if key in body:
            raise FormatError(f"line {lineno}: duplicate key {key!r}")
        body[key] = value.strip()
    return sections


def dump(sections: list[tuple[str, dict[str, str]]]) -> str:
    out = []
    for name, body in sections:
        out.append(f"[{name}]")
        out.extend(f"{k} = {v}" for k, v in body.items())
        out.append("")
    return "\n".join(out)


def digest(sections: list[tuple[str, dict[str, str]]]) -> str:
    """SHA-256 of the canonical dump, insensitive to comments and spacing."""
    return hashlib.sha256(dump(sections).encode("utf-8")).hexdigest()


class Section:
    """Typed accessor that remembers which keys were consumed."""

    def __init__(self, name: str, body: dict[str, str]):
        self.name = name
        self.body = body
        self.used: set[str] = set()

    def _raw(self, key, default):
        self.used.add(key)
        if key in self.body:
            return self.body[key]
        if default is _REQUIRED:
            raise FormatError(f"[{self.name}] missing required key {key!r}")
        return None

    def float(self, key, default=None):
        default = _REQUIRED if default is None else default
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return float(raw)
        except ValueError:
            raise FormatError(f"[{self.name}] {key} = {raw!r} is not a number") from None

    def int(self, key, default=None):
        default = _REQUIRED if default is None else default
        raw = self._raw(key, default)
        if raw is None:
            return default
        try:
            return int(raw)
        except ValueError:
            raise FormatError(f"[{self.name}] {key} = {raw!r} is not an integer") from None

    def str(self, key, default=None, choices=None):
        default = _REQUIRED if default is None else default
        raw = self._raw(key, default)
        value = default if raw is None else raw.lower()
        if choices is not None and value not in choices:
            raise FormatError(f"[{self.name}] {key} must be one of {sorted(choices)}, got {value!r}")
        return value

    def floats(self, key, default=None):
        default = _REQUIRED if default is None else default
        raw = self._raw(key, default)
        if raw is None:
            return list(default)
        try:
            return [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise FormatError(f"[{self.name}] {key} = {raw!r} is not a list of numbers") from None

    def check_unknown(self):
        extra = set(self.body) - self.used
        if extra:
            raise FormatError(f"[{self.name}] unknown keys: {', '.join(sorted(extra))}")


_REQUIRED = object()
