"""Seeded generation of problem instances and scalar-program draws.

Randomness is produced by a counter-based splitmix64 stream mapped through
the inverse normal CDF, so a (parameters, seed) pair reproduces bit-identical
data on any platform. Distinct quantities within one instance draw from
independent substreams derived from the seed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_MASK = 0xFFFFFFFFFFFFFFFF
_GOLDEN_INT = 0x9E3779B97F4A7C15
_GOLDEN = np.uint64(_GOLDEN_INT)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


def _mix_int(z: int) -> int:
    z &= _MASK
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


def derive_seed(seed: int, *tags: int) -> int:
    """Deterministic substream seed from a base seed and integer tags."""
    s = seed & _MASK
    for tag in tags:
        s = _mix_int(s + _GOLDEN_INT * (tag + 1))
    return s


def uniforms(seed: int, count: int) -> np.ndarray:
    """count iid uniforms in (0, 1) from the splitmix64 counter stream."""
    idx = np.arange(1, count + 1, dtype=np.uint64)
    state = np.uint64(seed & 0xFFFFFFFFFFFFFFFF) + idx * _GOLDEN
    bits = _mix(state)
    return (bits >> np.uint64(11)).astype(np.float64) * 2.0**-53 + 2.0**-54


def gaussians(seed: int, count: int) -> np.ndarray:
    """count iid standard normals via inversion of the normal CDF."""
    return ndtri(uniforms(seed, count))


@dataclass(frozen=True)
class Instance:
    """One random noisy linear system y = A x_tilde + v."""

    n: int
    m: int
    k: int
    A: np.ndarray
    v: np.ndarray
    x_tilde: np.ndarray
    y: np.ndarray
    seed: int


@dataclass(frozen=True)
class SurrogateDraw:
    """One random draw of the scalar program's data, with both sort orders."""

    n: int
    m: int
    k: int
    g: np.ndarray
    h: np.ndarray
    h_bar: np.ndarray
    h_bar_plus: np.ndarray
    seed: int


def generate_instance(
    n: int,
    m: int,
    k: int,
    sigma: float,
    x_mag: float,
    seed: int,
    random_support: bool = False,
) -> Instance:
    """A entries iid N(0,1); v entries iid N(0, sigma^2); x_tilde has k
    entries equal to x_mag at the tail indices (or a seeded random support
    when random_support is set, for sanity checks only)."""
    if not (0 <= k <= m < n):
        raise ValueError(f"need 0 <= k <= m < n, got n={n} m={m} k={k}")
    if sigma < 0.0 or x_mag < 0.0:
        raise ValueError("sigma and x_mag must be nonnegative")
    A = gaussians(derive_seed(seed, 1), m * n).reshape(m, n)
    v = sigma * gaussians(derive_seed(seed, 2), m)
    x_tilde = np.zeros(n)
    if k > 0:
        if random_support:
            u = uniforms(derive_seed(seed, 3), n)
            support = np.argsort(u)[:k]
        else:
            support = np.arange(n - k, n)
        x_tilde[support] = x_mag
    y = A @ x_tilde + v
    return Instance(n, m, k, A, v, x_tilde, y, seed)


def sort_general(h: np.ndarray, k: int) -> np.ndarray:
    """Zero block: magnitudes ascending; sparse block: negated, descending."""
    nk = h.size - k
    zero = np.sort(np.abs(h[:nk]))
    sparse = np.sort(-h[nk:])[::-1]
    return np.concatenate([zero, sparse])


def sort_signed(h: np.ndarray, k: int) -> np.ndarray:
    """Zero block: negated values ascending; sparse block as in sort_general."""
    nk = h.size - k
    zero = np.sort(-h[:nk])
    sparse = np.sort(-h[nk:])[::-1]
    return np.concatenate([zero, sparse])


def generate_surrogate_draw(
    n: int, k: int, m: int, seed: int, signed: bool = False
) -> SurrogateDraw:
    """g, h iid standard normals plus the two sorted rearrangements of h.

    Both sort orders are always populated; the signed flag is accepted for
    call-site symmetry with the solvers and does not change the draw.
    """
    del signed
    if not (0 <= k <= n) or m < 1:
        raise ValueError(f"need 0 <= k <= n and m >= 1, got n={n} k={k} m={m}")
    g = gaussians(derive_seed(seed, 4), m)
    h = gaussians(derive_seed(seed, 5), n)
    return SurrogateDraw(n, m, k, g, h, sort_general(h, k), sort_signed(h, k), seed)
