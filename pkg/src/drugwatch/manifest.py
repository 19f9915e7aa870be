"""Run manifests: what ran, on which bytes, producing which bytes.

Reports themselves are byte-stable across reruns; anything
time-dependent (timestamps, durations) lives only here, in the sidecar
manifest written next to each primary output.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _file_entry(path: str) -> dict:
    p = Path(path)
    return {"path": str(p), "sha256": sha256_file(path),
            "bytes": p.stat().st_size}


def manifest_path_for(output_path: str) -> str:
    return str(output_path) + ".manifest.json"


@dataclass
class RunManifest:
    command: str
    arguments: dict
    tool_version: str = __version__
    python_version: str = field(
        default_factory=lambda: sys.version.split()[0])
    started_at: str = field(
        default_factory=lambda: datetime.now(timezone.utc).isoformat())
    finished_at: str | None = None
    inputs: list = field(default_factory=list)
    outputs: list = field(default_factory=list)
    notes: dict = field(default_factory=dict)

    def add_input(self, path: str) -> None:
        self.inputs.append(_file_entry(path))

    def add_output(self, path: str) -> None:
        self.outputs.append(_file_entry(path))

    def finish(self) -> None:
        self.finished_at = datetime.now(timezone.utc).isoformat()

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "arguments": self.arguments,
            "tool_version": self.tool_version,
            "python_version": self.python_version,
            "started_at": self.started_at,
            "finished_at": self.finished_at,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "notes": self.notes,
        }

    def write(self, path: str | None = None) -> str:
        """Write the manifest sidecar; default path is derived from the
        first recorded output."""
        if self.finished_at is None:
            self.finish()
        if path is None:
            if not self.outputs:
                raise ValueError("no outputs recorded and no path given")
            path = manifest_path_for(self.outputs[0]["path"])
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
            f.write("\n")
        return str(path)
