"""ASCII point cloud files: one `x y z` triple per line, `#` comments."""

from __future__ import annotations

import numpy as np


def read_xyz(path: str) -> np.ndarray:
    rows = []
    with open(path) as f:
        for ln, line in enumerate(f, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"{path}:{ln}: expected 3 coordinates, got {len(parts)}")
            rows.append([float(p) for p in parts])
    pts = np.asarray(rows, dtype=np.float64).reshape(-1, 3)
    if pts.size and not np.isfinite(pts).all():
        raise ValueError(f"{path}: non-finite coordinate")
    return pts


def write_xyz(path: str, points: np.ndarray) -> None:
    with open(path, "w") as f:
        for x, y, z in np.asarray(points, dtype=np.float64):
            f.write(f"{x!r} {y!r} {z!r}\n")
