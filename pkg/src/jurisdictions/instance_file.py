"""Reading and writing instance files (JSON documents).

Example::

    {
      "dimension": 1,
      "agents": [[0], [1.9], [1.9], [4.1], [4.1], [4.1]],
      "transport": {"kind": "power", "exponent": 1},
      "project_cost": {"kind": "constant", "value": 1}
    }

``project_cost`` may also be ``{"kind": "by_size", "values": [...]}`` with one
value per coalition size, or ``{"kind": "table", "entries": [{"coalition":
[1, 2], "cost": 5}, ...], "default": <constant or by_size rule>}``.
"""
from __future__ import annotations

import hashlib
import json
from importlib import resources
from pathlib import Path

from .model import GameError, Instance, instance_to_raw, validate_instance


class ParseError(GameError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(msg + where)
        self.line = line
        self.column = column


def fixture_names() -> list[str]:
    root = resources.files("jurisdictions") / "fixtures"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _fixture_text(name: str) -> str | None:
    name = name[:-5] if name.endswith(".json") else name
    res = resources.files("jurisdictions") / "fixtures" / f"{name}.json"
    return res.read_text() if res.is_file() else None


def loads_instance(text: str) -> Instance:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None
    return validate_instance(raw)


def parse_instance(path: str | Path) -> Instance:
    """Load an instance from a file path, or from a shipped fixture by name."""
    p = Path(path)
    if p.is_file():
        return loads_instance(p.read_text())
    text = _fixture_text(str(path))
    if text is None:
        raise FileNotFoundError(f"no instance file or fixture named {str(path)!r}")
    return loads_instance(text)


def dumps_instance(instance: Instance) -> str:
    """Canonical serialization; equal instances give identical text."""
    return json.dumps(instance_to_raw(instance), sort_keys=True, separators=(",", ":"))


def instance_digest(instance: Instance) -> str:
    return "sha256:" + hashlib.sha256(dumps_instance(instance).encode()).hexdigest()
