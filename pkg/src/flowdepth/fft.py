"""Iterative radix-2 Cooley-Tukey transform.

Same sign and scaling conventions as ``numpy.fft``: the forward transform
is unnormalised with kernel ``exp(-2 pi i j k / n)``, the inverse divides
by ``n``.
"""

from __future__ import annotations

import numpy as np


def _check_length(n):
    if n < 1 or n & (n - 1):
        raise ValueError(f"length {n} is not a power of two")


def _bit_reverse_permutation(n):
    bits = n.bit_length() - 1
    idx = np.arange(n)
    rev = np.zeros(n, dtype=np.int64)
    for b in range(bits):
        rev |= ((idx >> b) & 1) << (bits - 1 - b)
    return rev


def fft(x):
    a = np.asarray(x, dtype=complex)
    n = a.shape[-1]
    _check_length(n)
    a = a[..., _bit_reverse_permutation(n)]
    size = 2
    while size <= n:
        half = size // 2
        tw = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(a.shape[:-1] + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * tw
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(a.shape)
        size *= 2
    return a


def ifft(x):
    a = np.asarray(x, dtype=complex)
    return np.conj(fft(np.conj(a))) / a.shape[-1]


def frequencies(n):
    """Integer mode numbers in transform order: 0, 1, ..., n/2-1, -n/2, ..., -1."""
    k = np.arange(n)
    return np.where(k < (n + 1) // 2, k, k - n)
