"""Canonical model-file serialization.

Model files are single JSON documents with sorted keys and compact separators,
so identical model state always produces identical bytes. Arrays are stored as
shape-tagged base64 blobs of little-endian float64, which round-trip bit for
bit. ``"format"`` and ``"version"`` fields make the containers self-describing.
"""

from __future__ import annotations

import base64
import json
from pathlib import Path

import numpy as np


class ModelFormatError(ValueError):
    """Raised for unreadable or incompatible model files."""


def encode_array(arr: np.ndarray) -> dict:
    arr = np.ascontiguousarray(arr, dtype="<f8")
    return {
        "shape": list(arr.shape),
        "dtype": "<f8",
        "data": base64.b64encode(arr.tobytes()).decode("ascii"),
    }


def decode_array(obj: dict) -> np.ndarray:
    if obj.get("dtype") != "<f8":
        raise ModelFormatError(f"unsupported tensor dtype: {obj.get('dtype')!r}")
    raw = base64.b64decode(obj["data"])
    arr = np.frombuffer(raw, dtype="<f8").reshape(obj["shape"]).copy()
    arr.flags.writeable = False
    return arr


def dumps_canonical(payload: dict) -> str:
    return json.dumps(payload, sort_keys=True, ensure_ascii=False, separators=(",", ":"))


def save_json(payload: dict, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps_canonical(payload))
        fh.write("\n")


def load_json(path: str | Path, expected_format: str) -> dict:
    with open(path, encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ModelFormatError(f"{path}: not a model file: {exc}") from exc
    if not isinstance(payload, dict) or payload.get("format") != expected_format:
        raise ModelFormatError(
            f"{path}: expected format {expected_format!r}, got {payload.get('format')!r}"
        )
    if payload.get("version") != 1:
        raise ModelFormatError(f"{path}: unsupported version {payload.get('version')!r}")
    return payload
