"""Per-realization delivery rules.

Every scheduler has a batch form ``*_batch(d, x)`` that accepts link arrays
with arbitrary leading axes (``d[..., j-1]`` is ``H[j, j]``, ``x[..., j-1]``
is ``H[j+1, j]``) and returns ``(delivered, server)`` arrays; ``server`` holds
the 1-based serving transmitter, 0 when the message is not delivered.  The
``schedule_*`` wrappers run one :class:`LinkRealization`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .assignment import MessageAssignment, assignment_from_string, comp_assignment
from .structure import atomic_runs
from .topology import LinkRealization

SCHEMES = ("scheme1", "scheme2", "scheme3", "thm4", "thm5")
STRATEGY_OF = {"scheme1": (1,), "scheme2": (2, 1, 0), "scheme3": (1, 2, 1, 0)}
BLOCK_OF = {"scheme1": 1, "scheme2": 3, "scheme3": 4, "thm4": 5, "thm5": 1}


@dataclass(frozen=True)
class ScheduleOutcome:
    delivered: tuple[bool, ...]
    server: tuple[int, ...]

    @property
    def count(self) -> int:
        return sum(self.delivered)

    def delivered_set(self) -> list[int]:
        return [i for i, v in enumerate(self.delivered, start=1) if v]

    def describe(self) -> str:
        parts = [f"{i}@{self.server[i - 1]}" for i in self.delivered_set()]
        return "{" + ",".join(str(i) for i in self.delivered_set()) + "} (" + " ".join(parts) + ")"


class _Links:
    """Padded 1-based view: out-of-range links read as absent."""

    PAD = 6

    def __init__(self, d, x):
        d = np.asarray(d, dtype=bool)
        x = np.asarray(x, dtype=bool)
        K = d.shape[-1]
        P = self.PAD
        self.K = K
        self.D = np.zeros(d.shape[:-1] + (K + 2 * P,), dtype=bool)
        self.X = np.zeros_like(self.D)
        self.D[..., P:P + K] = d
        self.X[..., P:P + K - 1] = x

    def dd(self, j):
        """``H[j, j]``."""
        return self.D[..., np.asarray(j) + self.PAD - 1]

    def xx(self, j):
        """``H[j+1, j]``."""
        return self.X[..., np.asarray(j) + self.PAD - 1]


def _empty(d):
    d = np.asarray(d, dtype=bool)
    return np.zeros(d.shape, dtype=bool), np.zeros(d.shape, dtype=np.int64)


def _put(delivered, server, users, ok, via):
    users = np.asarray(users)
    delivered[..., users - 1] = ok
    server[..., users - 1] = np.where(ok, np.asarray(via), 0)


def scheme1_base_batch(d, x):
    """Odd users have priority; even users transmit when clear of both neighbours."""
    d = np.asarray(d, dtype=bool)
    K = d.shape[-1]
    L = _Links(d, x)
    i = np.arange(1, K + 1)
    even = (i % 2 == 0)
    clear = (~L.dd(i - 1) | ~L.xx(i - 1)) & (~L.xx(i) | ~L.dd(i + 1))
    delivered = d & (~even | clear)
    return delivered, np.where(delivered, i, 0)


def scheme1_batch(d, x):
    d = np.asarray(d, dtype=bool)
    delivered, _ = scheme1_base_batch(d, x)
    i = np.arange(1, d.shape[-1] + 1)
    start, end = atomic_runs(d, x)
    flip = (end > start) & (start % 2 == 0) & (end % 2 == 0)
    delivered = np.where(flip, (i % 2 == 0) & d, delivered)
    return delivered, np.where(delivered, i, 0)


def _with_tail(d, x, n, block_fn):
    d = np.asarray(d, dtype=bool)
    x = np.asarray(x, dtype=bool)
    K = d.shape[-1]
    if K < n:
        raise ValueError(f"K={K} is shorter than the block length {n}")
    delivered, server = _empty(d)
    L = _Links(d, x)
    block_fn(L, K // n, delivered, server)
    whole = n * (K // n)
    if whole < K:
        td, ts = scheme1_base_batch(d[..., whole:], x[..., whole:])
        delivered[..., whole:] = td
        server[..., whole:] = np.where(td, ts + whole, 0)
    return delivered, server


def _scheme2_blocks(L, nb, delivered, server):
    u1 = 3 * np.arange(nb) + 1
    u2, u3 = u1 + 1, u1 + 2
    _put(delivered, server, u1, L.dd(u1), u1)
    _put(delivered, server, u2, L.xx(u1) & ~L.dd(u1) & (~L.dd(u2) | ~L.xx(u2)), u1)
    _put(delivered, server, u3, L.xx(u2), u2)


def scheme2_batch(d, x):
    return _with_tail(d, x, 3, _scheme2_blocks)


def _scheme3_blocks(L, nb, delivered, server):
    u1 = 4 * np.arange(nb) + 1
    u2, u3, u4 = u1 + 1, u1 + 2, u1 + 3
    w1 = L.dd(u1)
    w2 = L.dd(u2) & ~L.xx(u2) & (~L.xx(u1) | ~L.dd(u1))
    w3 = L.xx(u2)
    w4 = L.xx(u3) & (~L.dd(u3) | ~L.xx(u2))
    # users 2..4 atomic: serve W2 and W4 instead of W3
    swap = (~L.dd(u1) | ~L.xx(u1)) & L.dd(u2) & L.xx(u2) & L.dd(u3) & L.xx(u3)
    _put(delivered, server, u1, w1, u1)
    _put(delivered, server, u2, w2 | swap, u2)
    _put(delivered, server, u3, w3 & ~swap, u2)
    _put(delivered, server, u4, w4 | swap, u3)


def scheme3_batch(d, x):
    return _with_tail(d, x, 4, _scheme3_blocks)


def thm4_batch(d, x):
    """Blocks of five users; X_5m is silent.

    ``W1``/``W5`` interference at ``Y2``/``Y4`` is zero-forced by the second
    carrier.  When ``W3`` is served only because ``W2`` (or ``W4``) can move
    to its other carrier, that message is rerouted so it stays clear of ``Y3``.
    """
    d = np.asarray(d, dtype=bool)
    K = d.shape[-1]
    if K % 5:
        raise ValueError(f"thm4 needs K divisible by 5, got K={K}")
    delivered, server = _empty(d)
    L = _Links(d, x)
    u1 = 5 * np.arange(K // 5) + 1
    u2, u3, u4, u5 = u1 + 1, u1 + 2, u1 + 3, u1 + 4
    h11, h21, h22, h32 = L.dd(u1), L.xx(u1), L.dd(u2), L.xx(u2)
    h33, h43, h44, h54 = L.dd(u3), L.xx(u3), L.dd(u4), L.xx(u4)

    w3_x3 = h33 & ~h43 & (~h22 | ~h32 | (~h11 & h21))
    w3_x2 = ~w3_x3 & h32 & ~h22 & (~h43 | ~h33 | (~h54 & h44))
    move2 = w3_x3 & h32          # W2 on X2 would hit Y3
    move4 = w3_x2 & h33          # W4 on X3 would hit Y3
    w2_x2 = h22 & ~move2
    w2_x1 = h21 & ~h11 & (~h22 | move2)
    w4_x3 = h43 & ~move4
    w4_x4 = h44 & ~h54 & (~h43 | move4)

    _put(delivered, server, u1, h11, u1)
    _put(delivered, server, u2, w2_x2 | w2_x1, np.where(w2_x2, u2, u1))
    _put(delivered, server, u3, w3_x3 | w3_x2, np.where(w3_x3, u3, u2))
    _put(delivered, server, u4, w4_x3 | w4_x4, np.where(w4_x3, u3, u4))
    _put(delivered, server, u5, h54, u4)
    return delivered, server


def thm5_batch(d, x):
    """``T_i = {i-1, i}`` served in one left-to-right pass over residues mod 3."""
    d = np.asarray(d, dtype=bool)
    K = d.shape[-1]
    L = _Links(d, x)
    i = np.arange(1, K + 1)
    res = i % 3

    # residue 1 (evaluated at every i, used where i % 3 == 1)
    r1_prev = L.xx(i - 1) & ~L.dd(i - 1)
    r1_own = ~r1_prev & L.dd(i) & (~L.xx(i - 1) | (L.xx(i - 1) & L.dd(i - 1) & L.xx(i - 2)))
    r1_ok = r1_prev | r1_own

    def at_prev(a):
        out = np.zeros_like(a)
        out[..., 1:] = a[..., :-1]
        return out

    # residue 2: needs the decision for W_{i-1}
    prev_ok, prev_via_back = at_prev(r1_ok), at_prev(r1_prev)
    blocks_next = L.dd(i) & L.xx(i)                 # W_{i+1} on X_i would hit Y_i
    escape = blocks_next & L.dd(i + 1) & ~L.xx(i + 1)
    r2_prev = L.xx(i - 1) & (~L.dd(i - 1) | ~prev_ok) & (~blocks_next | escape)
    reserve = r2_prev & blocks_next                 # W_{i+1} must use X_{i+1}
    r2_own = ~r2_prev & L.dd(i) & ~L.xx(i) & (~L.xx(i - 1) | prev_via_back)

    # residue 0
    reserved = at_prev(reserve)
    r0_prev = ~reserved & L.xx(i - 1)
    r0_own = ~r0_prev & L.dd(i)

    via_prev = np.select([res == 1, res == 2], [r1_prev, r2_prev], r0_prev)
    via_own = np.select([res == 1, res == 2], [r1_own, r2_own], r0_own)
    delivered = via_prev | via_own
    server = np.where(via_prev, i - 1, np.where(via_own, i, 0))
    return delivered, server


BATCH = {
    "scheme1": scheme1_batch,
    "scheme2": scheme2_batch,
    "scheme3": scheme3_batch,
    "thm4": thm4_batch,
    "thm5": thm5_batch,
}


def scheme_assignment(scheme: str, K: int) -> MessageAssignment:
    if scheme in STRATEGY_OF:
        return assignment_from_string(STRATEGY_OF[scheme], K)
    if scheme in ("thm4", "thm5"):
        return comp_assignment(scheme, K)
    raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}")


def run_batch(scheme: str, d, x):
    try:
        fn = BATCH[scheme]
    except KeyError:
        raise ValueError(f"unknown scheme {scheme!r}; choose from {', '.join(SCHEMES)}") from None
    return fn(d, x)


def _single(scheme: str, r: LinkRealization) -> ScheduleOutcome:
    d, x = r.arrays()
    delivered, server = run_batch(scheme, d, x)
    return ScheduleOutcome(tuple(bool(v) for v in delivered), tuple(int(v) for v in server))


def schedule(scheme: str, r: LinkRealization) -> ScheduleOutcome:
    return _single(scheme, r)


def schedule_scheme1(r: LinkRealization) -> ScheduleOutcome:
    return _single("scheme1", r)


def schedule_scheme2(r: LinkRealization) -> ScheduleOutcome:
    return _single("scheme2", r)


def schedule_scheme3(r: LinkRealization) -> ScheduleOutcome:
    return _single("scheme3", r)


def schedule_thm4(r: LinkRealization) -> ScheduleOutcome:
    return _single("thm4", r)


def schedule_thm5(r: LinkRealization) -> ScheduleOutcome:
    return _single("thm5", r)


def scheme1_user_delivered(h: Callable[[int, int], bool], i: int, reach: int | None = None) -> bool:
    """Scalar form of the scheme-1 rule for user ``i``.

    ``h(r, t)`` reports link presence.  Atomic-run detection scans at most
    ``reach`` users to each side; if the run is not closed within that reach
    the base priority rule is used.
    """
    if not h(i, i):
        return False
    a = 0
    while (reach is None or a < reach) and h(i - a - 1, i - a - 1) and h(i - a, i - a - 1):
        a += 1
    b = 0
    while (reach is None or b < reach) and h(i + b + 1, i + b) and h(i + b + 1, i + b + 1):
        b += 1
    truncated = reach is not None and (a == reach or b == reach)
    even = i % 2 == 0
    if not truncated:
        s, e = i - a, i + b
        if e > s and s % 2 == 0 and e % 2 == 0:
            return even
    return not even or (a == 0 and b == 0)


@dataclass(frozen=True)
class Violation:
    message: int
    transmitter: int
    clause: str

    def __str__(self):
        return f"W{self.message} / X{self.transmitter}: {self.clause}"


def validate_outcome(r: LinkRealization, a: MessageAssignment, o: ScheduleOutcome) -> list[Violation]:
    """Check an outcome against the delivery invariants; empty list when valid."""
    K = r.K
    out: list[Violation] = []
    if len(o.delivered) != K or len(o.server) != K:
        return [Violation(0, 0, "outcome length does not match K")]
    serving: dict[int, list[int]] = {}
    for i in range(1, K + 1):
        if not o.delivered[i - 1]:
            continue
        t = o.server[i - 1]
        if t not in a.T(i):
            out.append(Violation(i, t, "server not in transmit set"))
        if not r.present(i, t):
            out.append(Violation(i, t, "absent serving link"))
        serving.setdefault(t, []).append(i)
    for t, msgs in serving.items():
        if len(msgs) > 1:
            for j in msgs:
                out.append(Violation(j, t, "transmitter serves two messages"))
    for i in range(1, K + 1):
        if not o.delivered[i - 1]:
            continue
        for t2 in (i - 1, i):
            for j in serving.get(t2, ()):
                if j == i or not r.present(i, t2):
                    continue
                if not any(t3 != t2 and r.present(i, t3) for t3 in a.T(j)):
                    out.append(Violation(i, t2, f"uncancelled interference from W{j}"))
    return out
