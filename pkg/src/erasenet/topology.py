"""Link structure of the linear (Wyner) network and its erasure realizations.

Transmitter ``j`` can only reach receivers ``j`` and ``j + 1``.  A realization
is stored as a bitmask over the ``2K - 1`` representable links: bit ``j - 1``
holds the direct link ``H[j, j]`` and bit ``K + j - 1`` holds the cross link
``H[j + 1, j]``.  Indices in the public API are 1-based, as in the model.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Sequence, Union

import numpy as np

ENUMERATION_BUDGET = 26

StreamKey = Union[int, Sequence[int]]


class EnumerationTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class ErasureModel:
    p: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"erasure probability must lie in [0, 1], got {self.p}")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")


@dataclass(frozen=True)
class LinkRealization:
    K: int
    mask: int
    _arrays: tuple = field(default=None, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        if self.K < 1:
            raise ValueError("K must be positive")
        if not 0 <= self.mask < (1 << (2 * self.K - 1)):
            raise ValueError(f"mask {self.mask:#x} out of range for K={self.K}")

    @classmethod
    def from_flags(cls, direct, cross) -> "LinkRealization":
        direct = [bool(v) for v in direct]
        cross = [bool(v) for v in cross]
        K = len(direct)
        if len(cross) != K - 1:
            raise ValueError("need K direct flags and K-1 cross flags")
        mask = 0
        for j, v in enumerate(direct):
            mask |= int(v) << j
        for j, v in enumerate(cross):
            mask |= int(v) << (K + j)
        return cls(K, mask)

    @classmethod
    def full(cls, K: int) -> "LinkRealization":
        return cls(K, (1 << (2 * K - 1)) - 1)

    @classmethod
    def from_hex(cls, K: int, text: str) -> "LinkRealization":
        return cls(K, int(text, 16))

    def to_hex(self) -> str:
        return format(self.mask, "x")

    def present(self, i: int, j: int) -> bool:
        """Whether ``H[i, j]`` (receiver ``i``, transmitter ``j``) is present."""
        if not (1 <= j <= self.K and 1 <= i <= self.K):
            return False
        if i == j:
            return bool(self.mask >> (j - 1) & 1)
        if i == j + 1:
            return bool(self.mask >> (self.K + j - 1) & 1)
        return False

    def arrays(self) -> tuple[np.ndarray, np.ndarray]:
        """Direct and cross presence flags as boolean arrays (0-based)."""
        if self._arrays is None:
            bits = (self.mask >> np.arange(2 * self.K - 1)) & 1
            bits = bits.astype(bool)
            object.__setattr__(self, "_arrays", (bits[: self.K], bits[self.K:]))
        return self._arrays

    @property
    def direct(self) -> tuple[bool, ...]:
        return tuple(bool(v) for v in self.arrays()[0])

    @property
    def cross(self) -> tuple[bool, ...]:
        return tuple(bool(v) for v in self.arrays()[1])

    @property
    def n_present(self) -> int:
        return bin(self.mask).count("1")

    @property
    def n_links(self) -> int:
        return 2 * self.K - 1


def _generator(seed: int, stream: StreamKey) -> np.random.Generator:
    key = (stream,) if isinstance(stream, (int, np.integer)) else tuple(stream)
    ss = np.random.SeedSequence(entropy=seed, spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def sample_links(K: int, model: ErasureModel, stream: StreamKey, n: int = 1):
    """Draw ``n`` realizations from the substream ``(seed, stream)``.

    Returns ``(d, x)`` with shapes ``(n, K)`` and ``(n, K - 1)``.  The result is
    a pure function of its arguments.
    """
    if K < 1:
        raise ValueError("K must be positive")
    u = _generator(model.seed, stream).random((n, 2 * K - 1))
    present = u >= model.p
    return present[:, :K], present[:, K:]


def sample_realization(K: int, model: ErasureModel, stream_index: StreamKey) -> LinkRealization:
    d, x = sample_links(K, model, stream_index, 1)
    return LinkRealization.from_flags(d[0], x[0])


def check_enumerable(K: int, budget: int = ENUMERATION_BUDGET) -> None:
    if K < 1:
        raise ValueError("K must be positive")
    if 2 * K - 1 > budget:
        raise EnumerationTooLarge(
            f"enumeration too large: K={K} has {2 * K - 1} links (budget {budget})")


def enumerate_realizations(K: int, budget: int = ENUMERATION_BUDGET) -> Iterator[LinkRealization]:
    """All ``2**(2K-1)`` realizations in ascending mask order."""
    check_enumerable(K, budget)
    for mask in range(1 << (2 * K - 1)):
        yield LinkRealization(K, mask)


def masks_to_links(masks: np.ndarray, K: int):
    """Decode integer masks into ``(d, x)`` boolean arrays."""
    masks = np.asarray(masks, dtype=np.int64)
    bits = ((masks[..., None] >> np.arange(2 * K - 1)) & 1).astype(bool)
    return bits[..., :K], bits[..., K:]


def all_links(K: int, budget: int = ENUMERATION_BUDGET, start: int = 0, stop: int | None = None):
    """Vectorized counterpart of :func:`enumerate_realizations` (same order)."""
    check_enumerable(K, budget)
    total = 1 << (2 * K - 1)
    stop = total if stop is None else min(stop, total)
    return masks_to_links(np.arange(start, stop, dtype=np.int64), K)


def realization_probability(r: LinkRealization, p: float) -> float:
    present = r.n_present
    return p ** (r.n_links - present) * (1.0 - p) ** present


def pattern_polynomial(n_present: np.ndarray, values: np.ndarray, n_links: int) -> np.ndarray:
    """Aggregate per-pattern values by number of present links.

    ``coef[k]`` is the sum of ``values`` over patterns with ``k`` present links,
    so the expectation at ``p`` is ``sum_k coef[k] (1-p)**k p**(n_links-k)``.
    """
    return np.bincount(np.asarray(n_present), weights=np.asarray(values, dtype=float),
                       minlength=n_links + 1)


def eval_pattern_polynomial(coef: np.ndarray, p: float) -> float:
    n = len(coef) - 1
    k = np.arange(n + 1)
    # python ints keep 0**0 == 1 at the endpoints
    weights = np.array([(1.0 - p) ** int(a) * p ** int(n - a) for a in k])
    return float(np.dot(coef, weights))
