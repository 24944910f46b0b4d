import os
from typing import Any

import orjson

JSON_OPTIONS = orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY


def read_json(path: str) -> Any:
    """Parse a JSON file."""
    with open(path, "rb") as f:
        return orjson.loads(f.read())


def dump_json(data: Any, sort_keys: bool = True) -> bytes:
    """Deterministic JSON bytes (2-space indent, trailing newline)."""
    options = JSON_OPTIONS if sort_keys else JSON_OPTIONS & ~orjson.OPT_SORT_KEYS
    return orjson.dumps(data, option=options) + b"\n"


def write_json(path: str, data: Any, sort_keys: bool = True) -> str:
    """Write ``data`` as deterministic JSON, creating parent folders."""
    folder = os.path.dirname(path)
    if folder:
        os.makedirs(folder, exist_ok=True)
    with open(path, "wb") as f:
        f.write(dump_json(data, sort_keys=sort_keys))
    return path


def resolve_path(base_file: str, reference: str) -> str:
    """Resolve ``reference`` relative to the folder of ``base_file`` unless absolute."""
    if os.path.isabs(reference):
        return reference
    return os.path.normpath(os.path.join(os.path.dirname(os.path.abspath(base_file)), reference))
