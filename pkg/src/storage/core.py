"""
Core file handling shared by every storage operation.

Documents are JSON; floats are written in their shortest round-trip form, so
a matrix read back from a file is bit-identical to the one written.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

from models.base_model import to_plain
from models.errors import ConfigurationError

logger = logging.getLogger(__name__)

# Bumped whenever a stored document changes shape
FORMAT_VERSION = 1

PathLike = Union[str, Path]


def write_json(path: PathLike, document: Dict[str, Any]) -> Path:
    """
    Write a document, creating parent directories as needed

    Args:
        path: Target file
        document: Records, arrays and plain values

    Returns:
        The path written
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w") as stream:
        json.dump(to_plain(document), stream, indent=2)
        stream.write("\n")
    logger.debug(f"Wrote {path}")
    return path


def read_json(path: PathLike) -> Dict[str, Any]:
    """Read a document; malformed JSON is a configuration error"""
    path = Path(path)
    with path.open() as stream:
        try:
            document = json.load(stream)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"{path}: not valid JSON ({e})")
    if not isinstance(document, dict):
        raise ConfigurationError(f"{path}: expected a JSON object at the top level")
    return document


def sibling(path: PathLike, suffix: str) -> Path:
    """output/run.json -> output/run.<suffix>"""
    path = Path(path)
    return path.with_name(f"{path.stem}.{suffix}")
