"""Maximum interference-free delivered set for M=1 assignments (TDMA oracle)."""

from __future__ import annotations

import numpy as np

from .assignment import MessageAssignment
from .schedulers import _Links
from .topology import LinkRealization

BRUTEFORCE_MAX_K = 20
LOOKBACK = 2


def _carriers(a: MessageAssignment) -> tuple[int, ...]:
    if a.M != 1 or not a.is_irreducible():
        raise ValueError("the TDMA oracle needs an irreducible M=1 assignment")
    return a.carriers()


def _link(L: _Links, r: int, t: int):
    if r == t:
        return L.dd(t)
    if r == t + 1:
        return L.xx(t)
    return np.zeros(L.D.shape[:-1], dtype=bool)


def _candidate(L, t, i):
    return _link(L, i, t[i - 1])


def _conflict(L, t, i, j):
    """Messages ``i`` and ``j`` cannot both be delivered."""
    ti, tj = t[i - 1], t[j - 1]
    if ti == tj:
        return np.ones(L.D.shape[:-1], dtype=bool)
    return _link(L, j, ti) | _link(L, i, tj)


def oracle_m1_batch(d, x, a: MessageAssignment, active=None) -> np.ndarray:
    """DP over users; any conflict spans at most ``LOOKBACK`` user indices.

    ``active`` (length-K bool) restricts which messages may be delivered;
    the rest stay silent.
    """
    t = _carriers(a)
    L = _Links(d, x)
    K = a.K
    if L.K != K:
        raise ValueError("link arrays and assignment sizes differ")
    shape = L.D.shape[:-1]
    # state: delivered flags of the last LOOKBACK users, most recent first
    n_states = 1 << LOOKBACK
    best = np.full((n_states,) + shape, -1, dtype=np.int64)
    best[0] = 0
    for i in range(1, K + 1):
        cand = _candidate(L, t, i)
        if active is not None and not active[i - 1]:
            cand = np.zeros(shape, dtype=bool)
        clash = [_conflict(L, t, i, i - k) if i - k >= 1 else np.zeros(shape, bool)
                 for k in range(1, LOOKBACK + 1)]
        new = np.full_like(best, -1)
        for s in range(n_states):
            v = best[s]
            alive = v >= 0
            skip = (s << 1) & (n_states - 1)
            new[skip] = np.maximum(new[skip], v)
            ok = alive & cand
            for k in range(LOOKBACK):
                if s >> k & 1:
                    ok &= ~clash[k]
            take = skip | 1
            new[take] = np.maximum(new[take], np.where(ok, v + 1, -1))
        best = new
    return best.max(axis=0)


def _popcount(v: np.ndarray) -> np.ndarray:
    v = v.astype(np.int64)
    c = np.zeros_like(v)
    while np.any(v):
        c += v & 1
        v >>= 1
    return c


def oracle_bruteforce_m1_batch(d, x, a: MessageAssignment, chunk_elems: int = 1 << 22) -> np.ndarray:
    """Exhaustive maximum over all ``2**K`` delivery subsets."""
    t = _carriers(a)
    K = a.K
    if K > BRUTEFORCE_MAX_K:
        raise ValueError(f"brute-force oracle limited to K <= {BRUTEFORCE_MAX_K}, got {K}")
    d = np.asarray(d, dtype=bool)
    x = np.asarray(x, dtype=bool)
    lead = d.shape[:-1]
    d2 = d.reshape(-1, K)
    x2 = x.reshape(d2.shape[0], K - 1)
    R = d2.shape[0]
    subsets = np.arange(1 << K, dtype=np.int64)
    sizes = _popcount(subsets)
    out = np.zeros(R, dtype=np.int64)
    step = max(1, chunk_elems // len(subsets))
    for lo in range(0, R, step):
        L = _Links(d2[lo:lo + step], x2[lo:lo + step])
        n = L.D.shape[0]
        cand_mask = np.zeros(n, dtype=np.int64)
        adj = np.zeros((K, n), dtype=np.int64)
        for i in range(1, K + 1):
            cand_mask |= _candidate(L, t, i).astype(np.int64) << (i - 1)
            for j in range(1, K + 1):
                if j != i:
                    adj[i - 1] |= _conflict(L, t, i, j).astype(np.int64) << (j - 1)
        S = subsets[None, :]
        ok = (S & ~cand_mask[:, None]) == 0
        for i in range(K):
            has_i = (S >> i) & 1 == 1
            ok &= ~has_i | ((S & adj[i][:, None]) == 0)
        out[lo:lo + n] = np.where(ok, sizes[None, :], 0).max(axis=1)
    return out.reshape(lead)


def oracle_m1(r: LinkRealization, a: MessageAssignment) -> int:
    d, x = r.arrays()
    return int(oracle_m1_batch(d, x, a))


def oracle_bruteforce_m1(r: LinkRealization, a: MessageAssignment) -> int:
    d, x = r.arrays()
    return int(oracle_bruteforce_m1_batch(d[None], x[None], a)[0])
