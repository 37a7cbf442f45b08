"""
This module provides integer matrix helpers.

The module relies on the NumPy library to represent matrices and bitmask
tables as ndarrays.

"""
import numpy as np

# number of set bits of every byte value
_BYTE_BITS = np.array([bin(value).count("1") for value in range(256)], dtype=np.int64)


def popcount(masks, width):
    """Number of set bits of each entry of ``masks`` (non-negative, < 2**width)."""
    masks = np.asarray(masks, dtype=np.int64)
    counts = np.zeros(masks.shape, dtype=np.int64)
    for shift in range(0, max(width, 1), 8):
        counts += _BYTE_BITS[(masks >> shift) & 0xFF]
    return counts


def lowest_bit(masks):
    """Index of the lowest set bit of each positive entry."""
    masks = np.asarray(masks, dtype=np.int64)
    return np.log2(masks & -masks).astype(np.int64)


def modular_rank(matrix, prime, stop_at=None):
    """Rank of an integer matrix over the field with ``prime`` elements.

    Primes below 2**31 use vectorized int64 elimination; larger primes fall
    back to Python integers in an object array so products never overflow.
    Elimination stops once ``stop_at`` pivots are found.
    """
    prime = int(prime)
    small = prime < 2**31
    dtype = np.int64 if small else object
    reduced = np.array(matrix, dtype=object) % prime
    reduced = reduced.astype(dtype)
    rows, cols = reduced.shape
    limit = min(rows, cols) if stop_at is None else min(rows, cols, stop_at)
    rank = 0
    for col in range(cols):
        if rank >= limit:
            break
        pivots = np.flatnonzero(reduced[rank:, col] != 0)
        if len(pivots) == 0:
            continue
        pivot = pivots[0] + rank
        if pivot != rank:
            reduced[[rank, pivot]] = reduced[[pivot, rank]]
        inverse = pow(int(reduced[rank, col]), -1, prime)
        reduced[rank] = (reduced[rank] * inverse) % prime
        below = np.flatnonzero(reduced[rank + 1 :, col] != 0) + rank + 1
        if len(below):
            factors = reduced[below, col].reshape(-1, 1)
            reduced[below] = (reduced[below] - factors * reduced[rank]) % prime
        rank += 1
    return rank
