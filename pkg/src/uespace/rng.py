"""Deterministic, platform-independent random streams.

Built on splitmix64 (key derivation and state expansion) and xoshiro256++
(bulk generation). Every logical entity in a synthetic world gets its own
stream, so generated data is a pure function of (seed, entity indices) and
is unaffected by generation order or batching.

Stream splitting scheme
-----------------------
``stream_key(seed, *parts)`` folds integer parts into a 64-bit key:
starting from the seed, each part is xored in (scaled by the golden-ratio
constant) and passed through the splitmix64 finalizer. A stream's
xoshiro256++ state is the first four splitmix64 outputs seeded by its key.

The uint64 sequences are bit-identical across kernel backends; derived
floats go through a single shared numpy code path.
"""

import numpy as np

from uespace import kernels

_MASK = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    # splitmix64 output scramble
    z = x & _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def splitmix64_sequence(seed: int, count: int) -> list[int]:
    """First ``count`` splitmix64 outputs for ``seed``."""
    state = seed & _MASK
    out = []
    for _ in range(count):
        state = (state + _GOLDEN) & _MASK
        out.append(_mix64(state))
    return out


def stream_key(seed: int, *parts: int) -> int:
    """Collision-resistant 64-bit key for one logical stream."""
    key = seed & _MASK
    for part in parts:
        key = _mix64(key ^ ((part * _GOLDEN) & _MASK))
    return key


def stream_states(keys) -> np.ndarray:
    """xoshiro256++ states (n, 4) for the given stream keys."""
    states = np.empty((len(keys), 4), dtype=np.uint64)
    for i, key in enumerate(keys):
        states[i] = splitmix64_sequence(key, 4)
    return states


def uniform_open01(states: np.ndarray, count: int) -> np.ndarray:
    """(n_streams, count) doubles in (0, 1], 53-bit resolution."""
    raw = kernels.xoshiro_block(states, count)
    return ((raw >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53


def gaussians(states: np.ndarray, count: int) -> np.ndarray:
    """(n_streams, count) standard normals via Box-Muller."""
    pairs = (count + 1) // 2
    u = uniform_open01(states, 2 * pairs)
    u1 = u[:, 0::2]
    u2 = u[:, 1::2]
    radius = np.sqrt(-2.0 * np.log(u1))
    angle = 2.0 * np.pi * u2
    out = np.empty((states.shape[0], 2 * pairs), dtype=np.float64)
    out[:, 0::2] = radius * np.cos(angle)
    out[:, 1::2] = radius * np.sin(angle)
    return out[:, :count]
