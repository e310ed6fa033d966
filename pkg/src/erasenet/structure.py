"""Decomposition of a realization into non-interfering subnetworks."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assignment import MessageAssignment
from .topology import LinkRealization


@dataclass(frozen=True)
class SubnetworkRange:
    start: int
    end: int
    atomic: bool

    def users(self) -> range:
        return range(self.start, self.end + 1)


def _m1_carriers(a: MessageAssignment) -> tuple[int, ...]:
    if a.M != 1 or not a.is_irreducible():
        raise ValueError("subnetwork decomposition needs an irreducible M=1 assignment")
    return a.carriers()


def split_subnetworks(r: LinkRealization, a: MessageAssignment) -> list[SubnetworkRange]:
    """Finest partition of the users into subnetworks.

    A cut is placed before user ``i`` whenever ``W[i-1]`` cannot interfere at
    ``Y[i]``: its carrier has no link to receiver ``i - 1`` or none to
    receiver ``i``.
    """
    if r.K != a.K:
        raise ValueError("realization and assignment sizes differ")
    t = _m1_carriers(a)
    K = r.K
    starts = [1]
    for i in range(2, K + 1):
        c = t[i - 2]
        if not (r.present(i - 1, c) and r.present(i, c)):
            starts.append(i)
    ends = [s - 1 for s in starts[1:]] + [K]
    return [SubnetworkRange(s, e, _is_atomic(r, t, s, e)) for s, e in zip(starts, ends)]


def _is_atomic(r: LinkRealization, t, s: int, e: int) -> bool:
    carriers = sorted({t[i - 1] for i in range(s, e + 1)})
    if carriers != list(range(carriers[0], carriers[-1] + 1)):
        return False
    for c in carriers:
        for rx in (c, c + 1):
            if s <= rx <= e and not r.present(rx, c):
                return False
    return True


def render_ranges(ranges: list[SubnetworkRange]) -> str:
    """``[1] [2 3 4]*`` style rendering; ``*`` marks atomic ranges."""
    return " ".join("[" + " ".join(str(u) for u in rg.users()) + "]" + ("*" if rg.atomic else "")
                    for rg in ranges)


def atomic_runs(d: np.ndarray, x: np.ndarray):
    """Maximal atomic runs under ``T_i = {i}``, vectorized over leading axes.

    A run is a maximal interval of users whose direct links and the cross
    links between them are all present.  These are the atomic subnetworks of
    :func:`split_subnetworks` together with the atomic prefix of every range
    that is non-atomic only because its last user's direct link is erased.

    Returns 1-based ``(start, end)`` arrays shaped like ``d``; entries are 0
    for users whose direct link is absent.
    """
    d = np.asarray(d, dtype=bool)
    x = np.asarray(x, dtype=bool)
    K = d.shape[-1]
    idx = np.arange(1, K + 1)
    joined = np.zeros(d.shape, dtype=bool)  # joined[i]: user i continues the run of user i-1
    if K > 1:
        joined[..., 1:] = d[..., :-1] & x & d[..., 1:]
    start = np.where(joined, 0, idx)
    start = np.maximum.accumulate(start, axis=-1)
    rev_joined = np.zeros(d.shape, dtype=bool)  # user i continues into user i+1
    if K > 1:
        rev_joined[..., :-1] = joined[..., 1:]
    end = np.where(rev_joined, K + 1, idx)
    end = np.flip(np.minimum.accumulate(np.flip(end, -1), axis=-1), -1)
    start = np.where(d, start, 0)
    end = np.where(d, end, 0)
    return start, end
