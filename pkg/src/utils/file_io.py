"""
Handles all file reading/writing in a consistent and safe way.
Controllers and the CLI should NOT touch disk operations directly.
"""
import csv
import hashlib
import io
import json
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, Iterable, Sequence, Tuple

SCHEMA_VERSION = "1.0"
TRAJECTORY_HEADER = ('time', 'collision_index', 'i', 'j', 'theta', 'observable_value')


def read_file(path: str) -> Tuple[bool, str]:
    """
    Reads a file and returns (success, content or error message).
    This avoids exceptions leaking into controllers or CLI.
    """
    try:
        content = Path(path).read_text(encoding="utf-8")
        return True, content
    except Exception as e:
        return False, str(e)


def write_file(path: str, data: str) -> Tuple[bool, str]:
    """
    Writes text to a file in UTF-8, creating parent directories.
    Returns (success, message).
    """
    try:
        target = Path(path)
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(data, encoding="utf-8")
        return True, f"Wrote {target}."
    except OSError as e:
        return False, f"File error: {e}"


def canonical_json(document: Dict) -> str:
    """Compact, key-sorted JSON used for hashing."""
    return json.dumps(document, sort_keys=True, separators=(',', ':'), ensure_ascii=False)


def content_hash(document: Dict) -> str:
    """sha256 of the canonical document without its timestamp and hash fields."""
    stripped = {k: v for k, v in document.items() if k not in ('timestamp', 'content_hash')}
    return hashlib.sha256(canonical_json(stripped).encode('utf-8')).hexdigest()


def build_document(command: str, config: Dict, result: Dict, provenance: Dict) -> Dict:
    """
    Wrap a command result in the versioned JSON envelope.

    Everything except the timestamp is deterministic for a fixed config, so
    the content hash identifies a run.
    """
    document = {
        'schema_version': SCHEMA_VERSION,
        'command': command,
        'config': config,
        'provenance': provenance,
        'result': result,
    }
    document['timestamp'] = datetime.now(timezone.utc).isoformat()
    document['content_hash'] = content_hash(document)
    return document


def dumps_document(document: Dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True, ensure_ascii=False)


def write_json(path: str, document: Dict) -> Tuple[bool, str]:
    """Writes a JSON document. Returns (success, message)."""
    try:
        text = dumps_document(document)
    except (TypeError, ValueError) as e:
        return False, f"Serialization error: {e}"
    return write_file(path, text + "\n")


def trajectory_csv(rows: Iterable[Sequence]) -> str:
    """Render trajectory rows under the fixed header."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(TRAJECTORY_HEADER)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def write_trajectory_csv(path: str, rows: Iterable[Sequence]) -> Tuple[bool, str]:
    """Writes trajectory rows as CSV. Returns (success, message)."""
    return write_file(path, trajectory_csv(rows))
