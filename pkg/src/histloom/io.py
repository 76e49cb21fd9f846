"""Sample files and JSON documents.

Text samples hold one decimal per line with 17 significant digits, which
round-trips every 64-bit float.  Binary samples are the magic ``HLS1``, a
little-endian uint64 count, then the raw little-endian float64 values.
"""

from __future__ import annotations

import json
import struct
from importlib import resources
from pathlib import Path

import numpy as np

from .density import AtomicMixture, PiecewiseDensity

MAGIC = b"HLS1"


class InputError(ValueError):
    """A malformed input file; the message names the offending line."""


def write_samples_text(path, xs) -> None:
    xs = np.asarray(xs, dtype=float)
    with open(path, "w") as fh:
        for x in xs.tolist():
            fh.write(f"{x:.17g}\n")


def read_samples_text(path) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            try:
                x = float(s)
            except ValueError:
                raise InputError(f"{path}:{lineno}: not a number: {s!r}") from None
            if not 0.0 <= x < 1.0:
                raise InputError(f"{path}:{lineno}: value {s} outside [0, 1)")
            out.append(x)
    return np.array(out, dtype=float)


def write_samples_binary(path, xs) -> None:
    xs = np.ascontiguousarray(xs, dtype="<f8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(xs)))
        fh.write(xs.tobytes())


def read_samples_binary(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise InputError(f"{path}: missing HLS1 header")
    if len(raw) < 12:
        raise InputError(f"{path}: truncated header")
    (n,) = struct.unpack("<Q", raw[4:12])
    if len(raw) != 12 + 8 * n:
        raise InputError(f"{path}: header says {n} values but payload has {(len(raw) - 12) / 8:g}")
    xs = np.frombuffer(raw, dtype="<f8", offset=12, count=n).astype(float)
    bad = np.flatnonzero((xs < 0.0) | (xs >= 1.0) | ~np.isfinite(xs))
    if len(bad):
        raise InputError(f"{path}: value #{bad[0] + 1} = {xs[bad[0]]!r} outside [0, 1)")
    return xs


def read_samples(path) -> np.ndarray:
    with open(path, "rb") as fh:
        head = fh.read(4)
    return read_samples_binary(path) if head == MAGIC else read_samples_text(path)


def write_samples(path, xs, binary: bool = False) -> None:
    (write_samples_binary if binary else write_samples_text)(path, xs)


def dumps(doc) -> str:
    """Canonical JSON: sorted keys, fixed indent, trailing newline."""
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def load_schema(name: str) -> dict:
    return json.loads(resources.files("histloom.schemas").joinpath(f"{name}.json").read_text())


def read_hypothesis(path):
    """PiecewiseDensity or AtomicMixture from a JSON file."""
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as e:
        raise InputError(f"{path}:{e.lineno}: invalid JSON: {e.msg}") from None
    if isinstance(doc, dict) and "hypothesis" in doc:
        doc = doc["hypothesis"]
    try:
        if isinstance(doc, dict) and "histogram" in doc:
            return AtomicMixture.from_dict(doc)
        return PiecewiseDensity.from_dict(doc)
    except (KeyError, TypeError, ValueError) as e:
        raise InputError(f"{path}: not a histogram document: {e}") from None


def write_hypothesis(path, h) -> None:
    Path(path).write_text(dumps(h.to_dict()))
