"""Numpy reference kernels.

These are the fallback implementations of the two hot loops: the
selective-scan recurrence (forward + analytic backward) and exact
nearest-neighbor queries over a uniform grid. The compiled module in
`_native.pyx` mirrors them bit-for-bit; `tests/test_kernels.py` holds
the two backends to equality.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "python"


def scan_forward(x, delta, a, b_seq, c_seq, skip):
    """Input-dependent linear recurrence over the sequence axis.

    x, delta: (B, L, D); a: (D, N); b_seq, c_seq: (B, L, N); skip: (D,).
    Per channel d: h_t = exp(delta_t a_d) * h_{t-1} + delta_t b_t x_t,
    y_t = <c_t, h_t> + skip_d x_t. Returns y (B, L, D) and the saved
    states h_all (B, L, D, N) needed by the backward pass.
    """
    n_b, n_l, n_d = x.shape
    n_s = a.shape[1]
    h = np.zeros((n_b, n_d, n_s))
    y = np.empty_like(x)
    h_all = np.empty((n_b, n_l, n_d, n_s))
    for t in range(n_l):
        abar = np.exp(delta[:, t, :, None] * a[None])  # (B, D, N)
        h = abar * h + (delta[:, t, :] * x[:, t, :])[:, :, None] * b_seq[:, t, None, :]
        h_all[:, t] = h
        y[:, t] = (h * c_seq[:, t, None, :]).sum(axis=2) + skip * x[:, t]
    return y, h_all


def scan_backward(x, delta, a, b_seq, c_seq, skip, h_all, dy):
    """Analytic gradients of scan_forward for all six inputs."""
    n_b, n_l, n_d = x.shape
    dx = np.empty_like(x)
    ddelta = np.empty_like(delta)
    da = np.zeros_like(a)
    db = np.empty_like(b_seq)
    dc = np.empty_like(c_seq)
    dskip = (dy * x).sum(axis=(0, 1))
    dh = np.zeros((n_b, n_d, a.shape[1]))
    for t in range(n_l - 1, -1, -1):
        dc[:, t] = (dy[:, t, :, None] * h_all[:, t]).sum(axis=1)
        dh = dh + dy[:, t, :, None] * c_seq[:, t, None, :]
        h_prev = h_all[:, t - 1] if t > 0 else np.zeros_like(dh)
        abar = np.exp(delta[:, t, :, None] * a[None])
        dabar = dh * h_prev
        dh_b = (dh * b_seq[:, t, None, :]).sum(axis=2)  # (B, D)
        ddelta[:, t] = (dabar * abar * a[None]).sum(axis=2) + dh_b * x[:, t]
        da += (dabar * abar * delta[:, t, :, None]).sum(axis=0)
        db[:, t] = (dh * (delta[:, t, :] * x[:, t, :])[:, :, None]).sum(axis=1)
        dx[:, t] = dh_b * delta[:, t] + dy[:, t] * skip
        dh = dh * abar
    return dx, ddelta, da, db, dc, dskip


# ---------------------------------------------------------------------------
# exact nearest neighbor, uniform grid buckets + ring expansion


def _build_grid(ref: np.ndarray):
    lo = ref.min(axis=0)
    hi = ref.max(axis=0)
    diag = float(np.linalg.norm(hi - lo))
    cell = diag / max(len(ref), 1) ** (1.0 / 3.0)
    if cell <= 0.0:
        cell = 1.0  # degenerate cloud: everything lands in one cell
    dims = np.minimum(np.floor((hi - lo) / cell).astype(np.int64) + 1, 1 << 20)
    dims = np.maximum(dims, 1)
    coords = np.clip(np.floor((ref - lo) / cell).astype(np.int64), 0, dims - 1)
    cell_ids = (coords[:, 2] * dims[1] + coords[:, 1]) * dims[0] + coords[:, 0]
    perm = np.argsort(cell_ids, kind="stable")
    sorted_ids = cell_ids[perm]
    return lo, hi, cell, dims, perm, sorted_ids


def _bucket(sorted_ids, perm, cid):
    i = np.searchsorted(sorted_ids, cid, side="left")
    j = np.searchsorted(sorted_ids, cid, side="right")
    return perm[i:j]


def nn_grid(query: np.ndarray, ref: np.ndarray):
    """Exact NN via grid bucketing: index into ref and squared distance.

    Ring expansion stops once the reverse-triangle lower bound
    (r*cell - dist(q, bbox)) exceeds the best distance found, so the
    result is exact even for queries outside the reference bbox.
    Ties break to the smallest reference index.
    """
    if len(ref) == 0 or len(query) == 0:
        raise ValueError("nearest-neighbor query on an empty cloud")
    lo, hi, cell, dims, perm, sorted_ids = _build_grid(ref)
    nx, ny, nz = int(dims[0]), int(dims[1]), int(dims[2])
    out_idx = np.empty(len(query), dtype=np.int64)
    out_d2 = np.empty(len(query), dtype=np.float64)
    max_ring = max(nx, ny, nz)
    for qi, q in enumerate(query):
        c0 = np.clip(np.floor((q - lo) / cell).astype(np.int64), 0, dims - 1)
        d_box = float(np.linalg.norm(np.maximum(lo - q, 0) + np.maximum(q - hi, 0)))
        best_d2 = np.inf
        best_idx = -1
        for r in range(max_ring + 1):
            zs = range(max(c0[2] - r, 0), min(c0[2] + r, nz - 1) + 1)
            found_any_cell = False
            for cz in zs:
                for cy in range(max(c0[1] - r, 0), min(c0[1] + r, ny - 1) + 1):
                    for cx in range(max(c0[0] - r, 0), min(c0[0] + r, nx - 1) + 1):
                        if max(abs(cx - c0[0]), abs(cy - c0[1]), abs(cz - c0[2])) != r:
                            continue
                        found_any_cell = True
                        cand = _bucket(sorted_ids, perm, (cz * ny + cy) * nx + cx)
                        if len(cand) == 0:
                            continue
                        d2 = ((ref[cand] - q) ** 2).sum(axis=1)
                        k = int(np.argmin(d2))
                        # smallest index among equal-distance candidates
                        eq = np.flatnonzero(d2 == d2[k])
                        ci = int(cand[eq].min())
                        cd = float(d2[k])
                        if cd < best_d2 or (cd == best_d2 and ci < best_idx):
                            best_d2, best_idx = cd, ci
            lb = r * cell - d_box
            if best_idx >= 0 and lb > 0 and lb * lb >= best_d2:
                break
            if not found_any_cell and best_idx >= 0:
                break
        out_idx[qi] = best_idx
        out_d2[qi] = best_d2
    return out_idx, out_d2


def nn_brute(query: np.ndarray, ref: np.ndarray, chunk: int = 512):
    """O(M*N) exact NN, vectorized and chunked to bound memory."""
    if len(ref) == 0 or len(query) == 0:
        raise ValueError("nearest-neighbor query on an empty cloud")
    out_idx = np.empty(len(query), dtype=np.int64)
    out_d2 = np.empty(len(query), dtype=np.float64)
    for s in range(0, len(query), chunk):
        q = query[s : s + chunk]
        d2 = ((q[:, None, :] - ref[None, :, :]) ** 2).sum(axis=2)
        idx = np.argmin(d2, axis=1)  # first minimum = smallest index
        out_idx[s : s + chunk] = idx
        out_d2[s : s + chunk] = d2[np.arange(len(q)), idx]
    return out_idx, out_d2
