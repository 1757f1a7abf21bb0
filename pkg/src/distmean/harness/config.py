from __future__ import annotations

from ..errors import ParseError


def load_config(path) -> dict:
    """Parse a flat ``key = value`` file. ``#`` starts a comment; keys are normalized to snake_case."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            if not sep or not key.strip():
                raise ParseError(f"{path}: line {lineno} is not of the form key=value")
            values[key.strip().replace("-", "_")] = value.strip()
    return values
