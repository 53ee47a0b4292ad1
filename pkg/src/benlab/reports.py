"""Report serialization: deterministic JSON and RFC-4180 CSV, written atomically.

Every report envelope embeds the seed, budgets, and a version string so a
stored artifact can be traced back to the code and configuration that
produced it.  Identical (config, seed) inputs must yield byte-identical
files; hence sorted keys, fixed field order, and repr-stable floats.
"""

from __future__ import annotations

import csv
import io
import json
import os
import subprocess
import tempfile

PACKAGE_VERSION = "0.1.0"


def version_string() -> str:
    """git-describe when available, else the static package version."""
    try:
        out = subprocess.run(
            ["git", "describe", "--always", "--dirty"],
            capture_output=True,
            text=True,
            timeout=5,
            cwd=os.path.dirname(os.path.abspath(__file__)),
        )
        if out.returncode == 0 and out.stdout.strip():
            return f"{PACKAGE_VERSION}+{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return PACKAGE_VERSION


def envelope(payload: dict, seed=None, budget=None, extra=None) -> dict:
    """Wrap a payload with provenance fields."""
    out = {
        "version": version_string(),
        "seed": seed,
        "budget": budget,
        "payload": payload,
    }
    if extra:
        out.update(extra)
    return out


def _atomic_write(path: str, data: str) -> None:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory)
    with os.fdopen(fd, "w", newline="") as fh:
        fh.write(data)
    os.replace(tmp, path)


def write_json(path: str, obj) -> None:
    _atomic_write(path, json.dumps(obj, sort_keys=True, indent=2) + "\n")


def write_csv(path: str, header, rows) -> None:
    """RFC-4180: CRLF line endings, mandatory header row."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(list(header))
    for row in rows:
        writer.writerow(list(row))
    _atomic_write(path, buf.getvalue())
