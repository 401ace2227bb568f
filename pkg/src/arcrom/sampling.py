"""Deterministic low-discrepancy sampling utilities."""

from __future__ import annotations

import numpy as np

__all__ = ["halton", "halton_unit_box"]

_PRIMES = np.array([
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61,
    67, 71, 73, 79, 83, 89, 97, 101, 103, 107, 109, 113, 127, 131, 137,
    139, 149, 151, 157, 163, 167, 173,
])


def _van_der_corput(indices: np.ndarray, base: int) -> np.ndarray:
    out = np.zeros(len(indices), dtype=float)
    denom = 1.0
    idx = indices.copy()
    while np.any(idx > 0):
        denom *= base
        out += (idx % base) / denom
        idx //= base
    return out


def halton(dim: int, count: int, start: int = 0) -> np.ndarray:
    """`count` Halton points in [0,1)^dim, starting at sequence index `start`+1.

    Deterministic: the same (dim, count, start) always yields the same
    points.  `start` acts as the seed offset.
    """
    if dim > len(_PRIMES):
        raise ValueError(f"Halton sampler supports at most {len(_PRIMES)} dimensions")
    indices = np.arange(start + 1, start + count + 1, dtype=np.int64)
    return np.stack([_van_der_corput(indices, int(p)) for p in _PRIMES[:dim]], axis=1)


def halton_unit_box(dim: int, count: int, start: int = 0) -> np.ndarray:
    """Halton points mapped to the centered box [-1/2, 1/2)^dim."""
    return halton(dim, count, start) - 0.5
