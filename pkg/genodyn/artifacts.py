# artifacts.py - Rendering and atomic writing of CLI artifacts
#
# JSON artifacts:  {"schema": "genodyn.<command>/1", "meta": {...}, "data": ...}
# CSV artifacts:   "# key: value" metadata lines, then a fixed header row.
# Text artifacts:  the same metadata lines, then the body (a .grn comment block).
# No timestamps anywhere: the same run configuration gives the same bytes.

import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from typing import Iterable, Optional, Sequence

from .config import TOOL_NAME, VERSION, Tolerances

SCHEMA_VERSION = 1


def _abs(path: str) -> str:
    """Return absolute path."""
    return os.path.abspath(path)


def config_hash(config: dict) -> str:
    """sha256 of the canonical JSON form of a run configuration."""
    canonical = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def build_meta(command: str, config: dict, tolerances: Tolerances) -> dict:
    return {
        "tool": TOOL_NAME,
        "version": VERSION,
        "command": command,
        "config_hash": config_hash(config),
        "tolerances": tolerances.as_dict(),
    }


def render_json(command: str, meta: dict, data) -> str:
    doc = {"schema": f"{TOOL_NAME}.{command}/{SCHEMA_VERSION}", "meta": meta, "data": data}
    return json.dumps(doc, indent=2) + "\n"


def format_cell(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _meta_lines(meta: dict) -> str:
    lines = [f"# {key}: {meta[key]}" for key in ("tool", "version", "command", "config_hash")]
    tol = meta["tolerances"]
    lines.append("# tolerances: " + " ".join(f"{k}={format_cell(v)}" for k, v in tol.items()))
    return "\n".join(lines) + "\n"


def render_text(meta: dict, body: str) -> str:
    """Plain text artifact behind a block of `#` metadata comment lines."""
    return _meta_lines(meta) + body


def render_csv(meta: dict, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    buf.write(_meta_lines(meta))
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_cell(v) for v in row])
    return buf.getvalue()


def write_artifact(text: str, out: Optional[str] = None) -> dict:
    """
    Write text to `out` atomically (temp file + rename), or to stdout when out is None.

    Args:
        text (str): The rendered artifact.
        out (str): Target path; None or "-" means stdout.

    Returns:
        dict: {"status": "success", "path": ...} or {"status": "error", "detail": ...}.
    """
    if out is None or out == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return {"status": "success", "path": "-"}
    target = _abs(out)
    directory = os.path.dirname(target)
    try:
        os.makedirs(directory, exist_ok=True)
        fd, tmp = tempfile.mkstemp(prefix=".genodyn-", dir=directory)
        try:
            with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
                f.write(text)
            os.replace(tmp, target)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
        return {"status": "success", "path": target}
    except OSError as e:
        return {"status": "error", "detail": str(e)}
