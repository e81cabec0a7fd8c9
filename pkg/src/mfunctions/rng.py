"""Counter-based uniform variates (Philox4x32-10, vectorized in numpy).

Every variate is a pure function of ``(seed, index, coordinate)``, so a
sample can be regenerated in isolation and any partition of the index range
across workers yields the same numbers.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_LO = np.uint64(0xFFFFFFFF)
_S32 = np.uint64(32)


def philox4x32(counter, key, rounds: int = 10):
    """Philox4x32 block function.

    ``counter`` is a sequence of four uint32 arrays (broadcastable), ``key``
    a pair of uint32 scalars.  Returns four uint32 arrays.
    """
    c0, c1, c2, c3 = (np.asarray(c, dtype=np.uint32) for c in counter)
    c0, c1, c2, c3 = np.broadcast_arrays(c0, c1, c2, c3)
    k0, k1 = np.uint32(key[0]), np.uint32(key[1])
    with np.errstate(over="ignore"):
        for i in range(rounds):
            if i:
                k0 = np.uint32(k0 + _W0)
                k1 = np.uint32(k1 + _W1)
            p0 = _M0 * c0.astype(np.uint64)
            p1 = _M1 * c2.astype(np.uint64)
            hi0 = (p0 >> _S32).astype(np.uint32)
            lo0 = (p0 & _LO).astype(np.uint32)
            hi1 = (p1 >> _S32).astype(np.uint32)
            lo1 = (p1 & _LO).astype(np.uint32)
            c0, c1, c2, c3 = hi1 ^ c1 ^ k0, lo1, hi0 ^ c3 ^ k1, lo0
    return c0, c1, c2, c3


def _key(seed: int):
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    return seed & 0xFFFFFFFF, seed >> 32


def uniforms(seed: int, index, coordinate) -> np.ndarray:
    """Doubles in [0, 1) keyed by ``(seed, index, coordinate)``.

    ``index`` and ``coordinate`` broadcast against each other; indices are
    64-bit, coordinates 32-bit.
    """
    index = np.asarray(index, dtype=np.uint64)
    coordinate = np.asarray(coordinate, dtype=np.uint32)
    index, coordinate = np.broadcast_arrays(index, coordinate)
    lo = (index & _LO).astype(np.uint32)
    hi = (index >> _S32).astype(np.uint32)
    r0, r1, _, _ = philox4x32((lo, hi, coordinate, np.zeros_like(coordinate)), _key(seed))
    a = (r0 >> np.uint32(5)).astype(np.uint64)
    b = (r1 >> np.uint32(6)).astype(np.uint64)
    return ((a << np.uint64(26)) + b) * (1.0 / 9007199254740992.0)
