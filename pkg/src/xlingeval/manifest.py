"""Run manifests: reproducibility metadata written atomically at run end."""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

TOOLKIT_VERSION = "0.1.0"


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def write_manifest(path, command_line: list[str], config: dict,
                   input_files: list, output_files: list,
                   seed: int | None = None) -> dict:
    """Hash inputs and outputs and write the manifest JSON atomically."""
    manifest = {
        "toolkit_version": TOOLKIT_VERSION,
        "command_line": list(command_line),
        "config_hash": sha256_text(json.dumps(config, sort_keys=True, default=str)),
        "seed": seed,
        "input_hashes": {str(p): sha256_file(p) for p in input_files},
        "output_files": sorted(str(p) for p in output_files),
        "output_hashes": {str(p): sha256_file(p) for p in output_files
                          if Path(p).is_file()},
    }
    path = Path(path)
    tmp = path.with_suffix(path.suffix + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)
    return manifest
