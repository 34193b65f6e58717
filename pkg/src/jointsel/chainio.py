"""Self-describing columnar chain files.

Byte layout (all integers little-endian):

    bytes 0..7    magic  b"JSCOL1\\n\\0"
    bytes 8..11   uint32 header length H
    bytes 12..    H bytes of UTF-8 JSON header
    then          one raw C-order data block per column, in header order

The JSON header has two keys: ``columns``, a list of
{"name", "dtype", "shape"} in block order (dtype is a numpy dtype string
such as "<f8"), and ``meta``, a flat dict carrying the spec hash, seed,
build identifier and any run metadata.  Reading is a single pass:
header, then ``np.frombuffer`` per column.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from . import __version__
from .engine import ChainOutput

__all__ = ["write_chain", "read_chain", "build_id"]

MAGIC = b"JSCOL1\n\0"


def build_id() -> str:
    """Short hex identifier of the package build."""
    return hashlib.sha1(f"jointsel-{__version__}".encode()).hexdigest()[:12]


def _columns_of(output: ChainOutput) -> dict[str, np.ndarray]:
    return {
        "alpha": output.alpha,
        "group_ind": output.group_ind,
        "feature_ind": output.feature_ind,
        "s2": output.s2,
        "inv_s2": output.inv_s2,
        "group_prob": output.group_prob,
        "scales": output.scales,
    }


def write_chain(output: ChainOutput, path: str | Path) -> Path:
    path = Path(path)
    cols = _columns_of(output)
    header = {
        "columns": [
            {"name": name, "dtype": arr.dtype.str, "shape": list(arr.shape)}
            for name, arr in cols.items()
        ],
        "meta": {
            "build": build_id(),
            "seed": output.seed,
            "iterations": output.iterations,
            "burn_in": output.burn_in,
            "thin": output.thin,
            "t_rate": output.t_rate,
            "acceptance": output.acceptance,
            "wall_seconds": output.wall_seconds,
            **output.meta,
        },
    }
    blob = json.dumps(header, sort_keys=True).encode()
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for arr in cols.values():
            fh.write(np.ascontiguousarray(arr).tobytes())
    return path


def read_chain(path: str | Path) -> ChainOutput:
    raw = Path(path).read_bytes()
    if raw[: len(MAGIC)] != MAGIC:
        raise ValueError(f"{path}: not a chain file (bad magic)")
    (hlen,) = struct.unpack_from("<I", raw, len(MAGIC))
    start = len(MAGIC) + 4
    header = json.loads(raw[start : start + hlen].decode())
    offset = start + hlen
    arrays = {}
    for col in header["columns"]:
        dtype = np.dtype(col["dtype"])
        shape = tuple(col["shape"])
        count = int(np.prod(shape)) if shape else 1
        arr = np.frombuffer(raw, dtype=dtype, count=count, offset=offset).reshape(shape)
        arrays[col["name"]] = arr.copy()
        offset += count * dtype.itemsize
    meta = header["meta"]
    out = ChainOutput(
        alpha=arrays["alpha"],
        group_ind=arrays["group_ind"],
        feature_ind=arrays["feature_ind"],
        s2=arrays["s2"],
        inv_s2=arrays["inv_s2"],
        group_prob=arrays["group_prob"],
        scales=arrays["scales"],
        t_rate=float(meta["t_rate"]),
        seed=int(meta["seed"]),
        iterations=int(meta["iterations"]),
        burn_in=int(meta["burn_in"]),
        thin=int(meta["thin"]),
        acceptance=dict(meta.get("acceptance", {})),
        wall_seconds=float(meta.get("wall_seconds", 0.0)),
        meta={
            k: v
            for k, v in meta.items()
            if k
            not in (
                "build",
                "seed",
                "iterations",
                "burn_in",
                "thin",
                "t_rate",
                "acceptance",
                "wall_seconds",
            )
        },
    )
    return out
