"""Counter-based random streams.

Every random quantity in the package is drawn from a Philox stream whose key
is derived from ``(seed, *path)``, where ``path`` is a sequence of integers or
string tags (e.g. ``("innovation",)`` or ``("rep", 17, "multipliers")``).
Streams with different paths are statistically independent, and results never
depend on the order in which streams are consumed, so Monte Carlo loops give
identical answers under any parallel schedule.

:class:`CounterStream` additionally exposes position-addressed draws: the value
at position ``p`` is a fixed function of ``(key, p)``. The models use this to
re-address a single innovation vector by its time index.
"""
from __future__ import annotations

import zlib

import numpy as np
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_TWO_M53 = 2.0 ** -53


def _path_word(part) -> int:
    if isinstance(part, (bool, np.bool_)):
        raise TypeError("boolean stream path components are ambiguous")
    if isinstance(part, (int, np.integer)):
        part = int(part)
        if part < 0:
            raise ValueError("integer stream path components must be non-negative")
        return part
    if isinstance(part, str):
        return zlib.crc32(part.encode("utf-8"))
    raise TypeError(f"unsupported stream path component {part!r}")


def stream_key(seed: int, *path) -> np.ndarray:
    """Return the 128-bit Philox key for ``(seed, *path)`` as two uint64 words."""
    seed = int(seed)
    if not 0 <= seed <= _MASK64:
        raise ValueError("seed must be a 64-bit unsigned integer")
    words = tuple(_path_word(p) for p in path)
    return np.random.SeedSequence(seed, spawn_key=words).generate_state(2, dtype=np.uint64)


def derive_seed(seed: int, *path) -> int:
    """Derive a child 64-bit seed, e.g. one per Monte Carlo repetition."""
    words = tuple(_path_word(p) for p in path)
    state = np.random.SeedSequence(int(seed), spawn_key=words).generate_state(1, dtype=np.uint64)
    return int(state[0])


def generator(seed: int, *path) -> np.random.Generator:
    """A sequential numpy Generator on the derived Philox stream."""
    return np.random.Generator(np.random.Philox(key=stream_key(seed, *path)))


class CounterStream:
    """Position-addressable uniforms and standard normals.

    Position ``p`` maps to the ``p``-th 64-bit output of the Philox stream; its
    top 53 bits give the uniform ``(k + 0.5) / 2**53`` in the open interval
    (0, 1), and normals are obtained by the inverse normal CDF. Requesting a
    slice ``[start, start + count)`` therefore returns exactly the same values
    whether it is drawn alone or as part of a larger block.
    """

    def __init__(self, seed: int, *path):
        self.seed = int(seed)
        self.path = tuple(path)
        self.key = stream_key(seed, *path)

    def raw(self, start: int, count: int) -> np.ndarray:
        start = int(start)
        count = int(count)
        if start < 0 or count < 0:
            raise ValueError("start and count must be non-negative")
        block, offset = divmod(start, 4)
        bitgen = np.random.Philox(key=self.key, counter=[block & _MASK64, block >> 64, 0, 0])
        return bitgen.random_raw(offset + count)[offset:]

    def uniforms(self, start: int, count: int) -> np.ndarray:
        top = (self.raw(start, count) >> np.uint64(11)).astype(np.float64)
        return (top + 0.5) * _TWO_M53

    def normals(self, start: int, count: int) -> np.ndarray:
        return ndtri(self.uniforms(start, count))
