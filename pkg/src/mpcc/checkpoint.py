"""Checkpoint serialization.

Layout: ASCII magic `MPCC1\n`, one `name rank d0 d1 ...\n` line per
tensor, a blank line terminating the header, then the raw little-endian
float64 payloads concatenated in header order.
"""

from __future__ import annotations

import numpy as np

MAGIC = b"MPCC1\n"


def save_tensors(path: str, tensors: dict[str, np.ndarray]) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        for name, arr in tensors.items():
            if " " in name:
                raise ValueError(f"tensor name with space: {name!r}")
            dims = " ".join(str(d) for d in arr.shape)
            f.write(f"{name} {arr.ndim}{' ' + dims if dims else ''}\n".encode())
        f.write(b"\n")
        for arr in tensors.values():
            f.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_tensors(path: str) -> dict[str, np.ndarray]:
    with open(path, "rb") as f:
        if f.read(len(MAGIC)) != MAGIC:
            raise ValueError(f"{path}: not an MPCC1 checkpoint")
        entries = []
        while True:
            line = f.readline()
            if line in (b"\n", b""):
                break
            parts = line.decode().split()
            name, rank = parts[0], int(parts[1])
            shape = tuple(int(d) for d in parts[2 : 2 + rank])
            if len(shape) != rank:
                raise ValueError(f"{path}: malformed header line {line!r}")
            entries.append((name, shape))
        out = {}
        for name, shape in entries:
            n = int(np.prod(shape)) if shape else 1
            buf = f.read(8 * n)
            if len(buf) != 8 * n:
                raise ValueError(f"{path}: truncated payload for {name}")
            out[name] = np.frombuffer(buf, dtype="<f8").astype(np.float64).reshape(shape)
        return out
