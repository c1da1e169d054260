"""Deterministic 64-bit PRNG used everywhere randomness is needed.

SplitMix64 with a counter-based state, so draws can be vectorized with
numpy uint64 arithmetic and are bit-identical across platforms. Named
substreams (`fork`) keep independent consumers (init, source sampling,
target sampling, data generation) from perturbing each other.
"""

from __future__ import annotations

import numpy as np

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_INV_2_53 = 2.0**-53


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


class SplitMix64:
    """Counter-based SplitMix64 stream."""

    def __init__(self, seed: int):
        self._seed = _U64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def fork(self, tag: str) -> "SplitMix64":
        """Derive an independent stream keyed by `tag`.

        The child seed mixes the parent seed with a hash of the tag, so
        forking is order-independent and reproducible.
        """
        h = _U64(2166136261)
        for ch in tag.encode():
            h = (h ^ _U64(ch)) * _U64(16777619)
        return SplitMix64(int(_mix(self._seed ^ h ^ _GOLDEN)))

    def next_u64(self, n: int | None = None):
        """Next raw 64-bit value(s); vectorized when n is given."""
        if n is None:
            out = int(self._raw(1)[0])
            return out
        return self._raw(n)

    def _raw(self, n: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + n + 1, dtype=np.uint64)
        self._counter += n
        with np.errstate(over="ignore"):
            return _mix(self._seed + idx * _GOLDEN)

    def uniform(self, n: int | None = None, lo: float = 0.0, hi: float = 1.0):
        """Uniform float64 in [lo, hi); scalar when n is None."""
        m = 1 if n is None else n
        u = (self._raw(m) >> _U64(11)).astype(np.float64) * _INV_2_53
        out = lo + u * (hi - lo)
        return float(out[0]) if n is None else out

    def normal(self, n: int | None = None, sigma: float = 1.0):
        """Standard normal draws via Box-Muller (deterministic pairing)."""
        m = 1 if n is None else n
        half = (m + 1) // 2
        u1 = self.uniform(half)
        u2 = self.uniform(half)
        r = np.sqrt(-2.0 * np.log(1.0 - u1))  # 1-u1 avoids log(0)
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])[:m] * sigma
        return float(z[0]) if n is None else z

    def integers(self, upper: int, n: int | None = None):
        """Bounded integers in [0, upper) by 64-bit modulo (bias < 2^-50 at desk scale)."""
        m = 1 if n is None else n
        v = (self._raw(m) % _U64(upper)).astype(np.int64)
        return int(v[0]) if n is None else v

    def shuffled(self, n: int) -> np.ndarray:
        """A permutation of range(n) via Fisher-Yates on vectorized draws."""
        perm = np.arange(n)
        draws = self._raw(max(n - 1, 0))
        for i in range(n - 1, 0, -1):
            j = int(draws[n - 1 - i] % _U64(i + 1))
            perm[i], perm[j] = perm[j], perm[i]
        return perm
