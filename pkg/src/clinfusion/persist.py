"""Model and report persistence.

Model files are a small self-describing binary container::

    magic "CLNFUSE1" | u32 version | u32 header_len | header JSON |
    raw float64 little-endian parameter arrays in declared order |
    sha256 of everything before it

The header carries the variant, class names and parameter shapes. The
trailing digest makes truncation, bit flips and appended garbage all fail
loudly; nothing partial is ever returned. Save→load→save is byte-stable
because the header JSON is canonical (sorted keys) and arrays round-trip
bitwise.

All writers in the package go through the atomic helpers here
(write-temp-then-rename), so concurrent readers never observe a partial
file.
"""

from __future__ import annotations

import hashlib
import json
import os
import struct
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .errors import PersistenceError, VariantMismatchError
from .fusion import FusionModel, FusionVariant
from .tensor import Tensor

__all__ = [
    "MODEL_MAGIC",
    "MODEL_FORMAT_VERSION",
    "atomic_write_bytes",
    "atomic_write_text",
    "save_model",
    "load_model",
    "write_eval_report",
    "write_history",
]

MODEL_MAGIC = b"CLNFUSE1"
MODEL_FORMAT_VERSION = 1
_DIGEST_LEN = 32


def atomic_write_bytes(path: str | Path, data: bytes) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def _model_bytes(model: FusionModel) -> bytes:
    header = {
        "format_version": MODEL_FORMAT_VERSION,
        "variant": asdict(model.variant),
        "class_names": list(model.class_names),
        "parameters": [
            {"name": name, "shape": list(t.value.shape)}
            for name, t in model.parameters()
        ],
    }
    hb = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    parts = [MODEL_MAGIC, struct.pack("<II", MODEL_FORMAT_VERSION, len(hb)), hb]
    for _, t in model.parameters():
        parts.append(np.ascontiguousarray(t.value, dtype="<f8").tobytes())
    payload = b"".join(parts)
    return payload + hashlib.sha256(payload).digest()


def save_model(model: FusionModel, path: str | Path) -> None:
    atomic_write_bytes(path, _model_bytes(model))


def load_model(path: str | Path, expected_kind: str | None = None) -> FusionModel:
    """Read a model file back; bitwise-exact round trip.

    ``expected_kind``, when given, must match the stored variant kind.
    """
    path = Path(path)
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise PersistenceError(f"cannot read model file {path}: {exc}") from None

    min_len = len(MODEL_MAGIC) + 8 + _DIGEST_LEN
    if len(data) < min_len:
        raise PersistenceError(f"{path}: truncated model file ({len(data)} bytes)")
    payload, digest = data[:-_DIGEST_LEN], data[-_DIGEST_LEN:]
    if hashlib.sha256(payload).digest() != digest:
        raise PersistenceError(f"{path}: checksum mismatch (corrupted or truncated file)")
    if payload[: len(MODEL_MAGIC)] != MODEL_MAGIC:
        raise PersistenceError(f"{path}: not a model file (bad magic)")
    off = len(MODEL_MAGIC)
    version, header_len = struct.unpack_from("<II", payload, off)
    off += 8
    if version != MODEL_FORMAT_VERSION:
        raise PersistenceError(
            f"{path}: unsupported model format version {version} "
            f"(this build reads version {MODEL_FORMAT_VERSION})"
        )
    if off + header_len > len(payload):
        raise PersistenceError(f"{path}: truncated model header")
    try:
        header = json.loads(payload[off:off + header_len].decode("utf-8"))
        variant = FusionVariant(**header["variant"])
        class_names = header["class_names"]
        param_meta = header["parameters"]
    except (ValueError, KeyError, TypeError) as exc:
        raise PersistenceError(f"{path}: malformed model header: {exc}") from None
    off += header_len

    if expected_kind is not None and variant.kind != expected_kind:
        raise VariantMismatchError(
            f"{path}: model holds variant '{variant.kind}', expected '{expected_kind}'"
        )

    params: dict[str, Tensor] = {}
    for meta in param_meta:
        shape = tuple(int(x) for x in meta["shape"])
        nbytes = int(np.prod(shape)) * 8
        if off + nbytes > len(payload):
            raise PersistenceError(f"{path}: truncated parameter '{meta['name']}'")
        arr = np.frombuffer(payload[off:off + nbytes], dtype="<f8").reshape(shape).copy()
        params[meta["name"]] = Tensor(arr)
        off += nbytes
    if off != len(payload):
        raise PersistenceError(f"{path}: {len(payload) - off} unexpected trailing bytes")

    try:
        return FusionModel(variant, params, class_names)
    except Exception as exc:
        raise PersistenceError(f"{path}: inconsistent model file: {exc}") from None


def write_eval_report(report, out_dir: str | Path) -> tuple[Path, Path]:
    """Write report.json (full curves) and summary.csv (flat AUC table)."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    json_path = out_dir / "report.json"
    csv_path = out_dir / "summary.csv"
    atomic_write_text(json_path, json.dumps(report.to_dict(), indent=2) + "\n")
    lines = ["class,auc_roc,auc_pr"]
    for name, auc_roc, auc_pr in report.summary_rows():
        lines.append(f"{name},{auc_roc!r},{auc_pr!r}")
    atomic_write_text(csv_path, "\n".join(lines) + "\n")
    return json_path, csv_path


def write_history(history, path: str | Path) -> None:
    """One JSON record per epoch (JSON Lines)."""
    lines = [json.dumps(rec.to_dict(), sort_keys=True) for rec in history]
    atomic_write_text(path, "\n".join(lines) + ("\n" if lines else ""))
