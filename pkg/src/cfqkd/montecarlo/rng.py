"""Counter-based uniform stream.

Draw ``k`` of pulse ``i`` is SplitMix64 evaluated at counter
``key(seed) + (i * DRAWS_PER_PULSE + k) * GAMMA``, so any pulse range can be
generated independently and in any order. Both implementations below produce
bit-identical output.
"""
from __future__ import annotations

import numpy as np

from .._jit import njit

DRAWS_PER_PULSE = 16

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MIX1 = 0xBF58476D1CE4E5B9
_MIX2 = 0x94D049BB133111EB
_INV_2_53 = 1.0 / 9007199254740992.0


def _finalize_int(z: int) -> int:
    z = ((z ^ (z >> 30)) * _MIX1) & _MASK
    z = ((z ^ (z >> 27)) * _MIX2) & _MASK
    return z ^ (z >> 31)


def stream_key(seed: int) -> np.uint64:
    """Scramble a user seed (any Python int) into the 64-bit stream key."""
    return np.uint64(_finalize_int((int(seed) + _GAMMA) & _MASK))


def uniform_reference(key: int, pulse: int, draw: int) -> float:
    """Plain-integer implementation used as the test oracle."""
    z = (int(key) + (pulse * DRAWS_PER_PULSE + draw + 1) * _GAMMA) & _MASK
    return (_finalize_int(z) >> 11) * _INV_2_53


GAMMA = np.uint64(_GAMMA)
MIX1 = np.uint64(_MIX1)
MIX2 = np.uint64(_MIX2)
S30 = np.uint64(30)
S27 = np.uint64(27)
S31 = np.uint64(31)
S11 = np.uint64(11)
STRIDE = np.uint64(DRAWS_PER_PULSE)
ONE = np.uint64(1)


@njit(inline="always")
def uniform(key, pulse, draw):
    z = key + (np.uint64(pulse) * STRIDE + np.uint64(draw) + ONE) * GAMMA
    z = (z ^ (z >> S30)) * MIX1
    z = (z ^ (z >> S27)) * MIX2
    z = z ^ (z >> S31)
    return np.float64(z >> S11) * _INV_2_53


def uniform_array(key: np.uint64, pulses: np.ndarray, draw: int) -> np.ndarray:
    """Vectorised :func:`uniform` over an array of pulse indices."""
    with np.errstate(over="ignore"):
        z = key + (pulses.astype(np.uint64) * STRIDE + np.uint64(draw) + ONE) * GAMMA
        z = (z ^ (z >> S30)) * MIX1
        z = (z ^ (z >> S27)) * MIX2
        z = z ^ (z >> S31)
    return (z >> S11).astype(np.float64) * _INV_2_53
