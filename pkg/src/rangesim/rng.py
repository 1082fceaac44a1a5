"""Counter-based random number streams.

Every draw is a pure function of (key, counter): the same pair always yields
the same value, independent of call history, process, or platform. That makes
runs replayable from their key alone and lets paired experiments share the
exact same underlying noise. Values come from the splitmix64 finalizer applied
to key-offset counters, drawn vectorized as uint64 lanes.
"""

from __future__ import annotations

import numpy as np
from scipy.special import ndtri

_M64 = 0xFFFFFFFFFFFFFFFF
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
# float64 uniforms keep the top 53 bits
_U53 = 1.0 / (1 << 53)


def _finalize(x: np.ndarray) -> np.ndarray:
    # uint64 array lanes; wraparound multiply is the point
    x = (x ^ (x >> np.uint64(30))) * _MIX1
    x = (x ^ (x >> np.uint64(27))) * _MIX2
    return x ^ (x >> np.uint64(31))


def mix(value: int) -> int:
    """One-shot 64-bit hash of an integer (mod 2**64)."""
    x = value & _M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _M64
    return x ^ (x >> 31)


def derive_key(base: int, *parts: int) -> int:
    """Fold integers into a stream key; order-sensitive and collision-scattering."""
    k = mix((base + 0x9E3779B97F4A7C15) & _M64)
    for p in parts:
        k = mix(((k ^ (p & _M64)) + 0x9E3779B97F4A7C15) & _M64)
    return k


def uniforms_for(key: int, counters: np.ndarray) -> np.ndarray:
    """Uniforms in [0, 1) for an arbitrary array of counters under key."""
    idx = np.asarray(counters, dtype=np.uint64)
    bits = _finalize(np.uint64(key & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN)
    return (bits >> np.uint64(11)).astype(np.float64) * _U53


def normals_for(key: int, counters: np.ndarray) -> np.ndarray:
    """Standard normals for an arbitrary array of counters under key."""
    idx = np.asarray(counters, dtype=np.uint64)
    bits = _finalize(np.uint64(key & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN)
    # offset by half an ulp so u is strictly inside (0, 1)
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53
    return ndtri(u)


def uniforms_at(key: int, counter: int, n: int) -> np.ndarray:
    """n uniforms in [0, 1) for counters counter .. counter+n-1 under key."""
    return uniforms_for(key, np.arange(counter, counter + n, dtype=np.uint64))


def normals_at(key: int, counter: int, n: int) -> np.ndarray:
    """n standard normals via the inverse CDF of counter uniforms."""
    return normals_for(key, np.arange(counter, counter + n, dtype=np.uint64))


class RngStream:
    """Stateful cursor over a counter-based stream.

    The stream is identified by its key; the counter only tracks how many
    values have been consumed. Constructing a stream at (key, c) and drawing
    continues exactly where a stream that already consumed c values would.
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = int(key) & 0xFFFFFFFFFFFFFFFF
        self.counter = int(counter)

    def uniforms(self, n: int) -> np.ndarray:
        out = uniforms_at(self.key, self.counter, n)
        self.counter += n
        return out

    def normals(self, n: int) -> np.ndarray:
        out = normals_at(self.key, self.counter, n)
        self.counter += n
        return out

    def uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def normal(self) -> float:
        return float(self.normals(1)[0])

    def permutation(self, n: int) -> np.ndarray:
        """Uniformly random permutation of range(n)."""
        return np.argsort(self.uniforms(n), kind="stable")

    def integers(self, n: int, high: int) -> np.ndarray:
        """n integers in [0, high), suitable for bootstrap resampling."""
        return np.minimum((self.uniforms(n) * high).astype(np.int64), high - 1)

    def spawn(self, tag: int) -> "RngStream":
        """Independent child stream; children with distinct tags never collide."""
        return RngStream(derive_key(self.key, tag))
