"""Expectation machinery: Monte Carlo, exact block/finite-K enumeration and
exact interior marginals."""

from __future__ import annotations

import math
import os
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .assignment import MessageAssignment, assignment_from_string
from .oracle import oracle_m1_batch
from .schedulers import BLOCK_OF, SCHEMES, run_batch, scheme1_user_delivered, thm5_batch
from .topology import (ENUMERATION_BUDGET, ErasureModel, check_enumerable, eval_pattern_polynomial,
                       masks_to_links, pattern_polynomial, sample_links)

ORACLE = "oracle"
DEFAULT_TRIM = 6
WINDOW_MIN, WINDOW_MAX = 4, 12
THM5_RADIUS = 4
_ENUM_CHUNK = 1 << 16


def thread_count() -> int:
    n = int(os.environ.get("ERASENET_THREADS", "0") or 0)
    return n if n > 0 else (os.cpu_count() or 1)


@dataclass(frozen=True)
class DofEstimate:
    p: float
    mean: float
    std_error: float
    trials: int
    K: int
    trim: int

    def ci(self, z: float = 1.96) -> tuple[float, float]:
        return self.mean - z * self.std_error, self.mean + z * self.std_error


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str
    K: int
    p_grid: tuple[float, ...]
    trials: int = 200
    seed: int = 0
    trim: int = DEFAULT_TRIM
    strategy: tuple[int, ...] = field(default=(1,))

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        if self.scheme not in SCHEMES and self.scheme != ORACLE:
            raise ValueError(f"unknown scheme {self.scheme!r}; choose from "
                             f"{', '.join(SCHEMES + (ORACLE,))}")
        if any(not 0.0 <= p <= 1.0 for p in self.p_grid):
            raise ValueError("p grid must lie within [0, 1]")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.trim < 0 or self.K - 2 * self.trim < 1:
            raise ValueError(f"trim={self.trim} leaves no users out of K={self.K}")
        if self.scheme == ORACLE:
            self.assignment()
        else:
            block = BLOCK_OF[self.scheme]
            if self.K % block:
                raise ValueError(f"{self.scheme} needs K divisible by {block}, got K={self.K}")

    def assignment(self) -> MessageAssignment:
        return assignment_from_string(self.strategy, self.K)


def _trial_means(cfg: ExperimentConfig, p_index: int, trials: range) -> np.ndarray:
    model = ErasureModel(cfg.p_grid[p_index], cfg.seed)
    K, trim = cfg.K, cfg.trim
    d = np.empty((len(trials), K), dtype=bool)
    x = np.empty((len(trials), K - 1), dtype=bool)
    for row, t in enumerate(trials):
        dt, xt = sample_links(K, model, (p_index, t))
        d[row], x[row] = dt[0], xt[0]
    inside = K - 2 * trim
    if cfg.scheme == ORACLE:
        active = np.zeros(K, dtype=bool)
        active[trim:K - trim] = True
        counts = oracle_m1_batch(d, x, cfg.assignment(), active=active)
    else:
        delivered, _ = run_batch(cfg.scheme, d, x)
        counts = delivered[:, trim:K - trim].sum(axis=1)
    return counts / inside


def _estimate(cfg: ExperimentConfig, p_index: int, pool, chunk: int) -> DofEstimate:
    parts = [range(lo, min(lo + chunk, cfg.trials)) for lo in range(0, cfg.trials, chunk)]
    if pool is None:
        means = [_trial_means(cfg, p_index, r) for r in parts]
    else:
        means = list(pool.map(lambda r: _trial_means(cfg, p_index, r), parts))
    m = np.concatenate(means)
    se = float(m.std(ddof=1) / math.sqrt(len(m))) if len(m) > 1 else 0.0
    return DofEstimate(cfg.p_grid[p_index], float(m.mean()), se, cfg.trials, cfg.K, cfg.trim)


def monte_carlo(cfg: ExperimentConfig, threads: int | None = None) -> list[DofEstimate]:
    """Trimmed per-user DoF estimate at every grid point.

    Trial ``t`` at grid index ``k`` always uses the substream ``(k, t)``, so
    the output does not depend on the thread count.
    """
    threads = thread_count() if threads is None else threads
    chunk = max(1, min(64, 2_000_000 // max(cfg.K, 1)))
    if threads <= 1:
        return [_estimate(cfg, k, None, chunk) for k in range(len(cfg.p_grid))]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return [_estimate(cfg, k, pool, chunk) for k in range(len(cfg.p_grid))]


# exact enumeration ---------------------------------------------------------

_BLOCK_SCHEMES = {"scheme2": 3, "scheme3": 4, "thm4": 5}


@lru_cache(maxsize=None)
def _block_polynomial(scheme: str) -> np.ndarray:
    b = _BLOCK_SCHEMES[scheme]
    n = 2 * b - 2  # the block's last transmitter is silent
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    d = np.zeros((len(masks), b), dtype=bool)
    d[:, :b - 1] = bits[:, :b - 1]
    x = bits[:, b - 1:]
    delivered, _ = run_batch(scheme, d, x)
    return pattern_polynomial(bits.sum(axis=1), delivered.sum(axis=1) / b, n)


def exact_block_expectation(scheme: str, p: float) -> float:
    """Per-user DoF of a block scheme by enumerating one decoupled block."""
    if scheme not in _BLOCK_SCHEMES:
        raise ValueError(f"{scheme} has no decoupled blocks; use one of {', '.join(_BLOCK_SCHEMES)}")
    _check_p(p)
    return eval_pattern_polynomial(_block_polynomial(scheme), p)


def _check_p(p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")


@lru_cache(maxsize=64)
def _small_k_polynomial(scheme: str, K: int, assignment: MessageAssignment | None,
                        budget: int) -> np.ndarray:
    check_enumerable(K, budget)
    n = 2 * K - 1
    total = 1 << n
    coef = np.zeros(n + 1)
    for lo in range(0, total, _ENUM_CHUNK):
        masks = np.arange(lo, min(lo + _ENUM_CHUNK, total), dtype=np.int64)
        d, x = masks_to_links(masks, K)
        if scheme == ORACLE:
            counts = oracle_m1_batch(d, x, assignment)
        else:
            counts = run_batch(scheme, d, x)[0].sum(axis=1)
        coef += pattern_polynomial(d.sum(axis=1) + x.sum(axis=1), counts / K, n)
    return coef


def exact_small_k(scheme: str, K: int, p: float, assignment: MessageAssignment | None = None,
                  budget: int = ENUMERATION_BUDGET) -> float:
    """Exact expected delivered count / K over all realizations of a K-user network.

    ``scheme`` is a scheduler name or ``"oracle"`` (then ``assignment`` is
    required and must be an irreducible M=1 assignment).
    """
    _check_p(p)
    if scheme == ORACLE:
        if assignment is None:
            raise ValueError("the oracle needs an assignment")
        if assignment.K != K:
            raise ValueError("assignment size differs from K")
    elif scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    else:
        assignment = None
    return eval_pattern_polynomial(_small_k_polynomial(scheme, K, assignment, budget), p)


# interior marginals ---------------------------------------------------------

class _NeedLink(Exception):
    def __init__(self, key):
        self.key = key


def lazy_terms(fn: Callable[[Callable[[int, int], bool]], float]) -> dict:
    """Enumerate only the links ``fn`` reads, branching on each first read.

    Returns ``{(n_present, n_absent): summed value}`` over the leaves of the
    decision tree; links never read are marginalized out exactly.
    """
    terms: dict = defaultdict(float)
    stack: list[dict] = [{}]
    while stack:
        fixed = stack.pop()

        def h(r, t, fixed=fixed):
            if r not in (t, t + 1):
                return False
            try:
                return fixed[(r, t)]
            except KeyError:
                raise _NeedLink((r, t)) from None

        try:
            v = fn(h)
        except _NeedLink as need:
            stack.append({**fixed, need.key: True})
            stack.append({**fixed, need.key: False})
            continue
        a = sum(fixed.values())
        terms[(a, len(fixed) - a)] += float(v)
    return dict(terms)


def eval_terms(terms: dict, p: float) -> float:
    return sum(v * (1.0 - p) ** a * p ** b for (a, b), v in terms.items())


@lru_cache(maxsize=None)
def _scheme1_terms(window: int) -> tuple:
    out = []
    for centre in (1000, 1001):  # one even and one odd user, far from any edge
        out.append(lazy_terms(lambda h, c=centre: scheme1_user_delivered(h, c, reach=window)))
    return tuple(out)


@lru_cache(maxsize=None)
def _thm5_polynomials(radius: int) -> tuple:
    n = 4 * radius + 1
    masks = np.arange(1 << n, dtype=np.int64)
    bits = ((masks[:, None] >> np.arange(n)) & 1).astype(bool)
    present = bits.sum(axis=1)
    out = []
    for r in (0, 1, 2):
        c = radius + 1
        while c % 3 != r:
            c += 1
        K = c + radius
        d = np.zeros((len(masks), K), dtype=bool)
        x = np.zeros((len(masks), K - 1), dtype=bool)
        d[:, c - radius - 1:c + radius] = bits[:, :2 * radius + 1]
        x[:, c - radius - 1:c + radius - 1] = bits[:, 2 * radius + 1:]
        delivered, _ = thm5_batch(d, x)
        out.append(pattern_polynomial(present, delivered[:, c - 1], n))
    return tuple(out)


def interior_marginal(scheme: str, p: float, window: int) -> tuple[float, float]:
    """Exact delivery probability of a deep-interior user, averaged over residues.

    Returns ``(value, bound)`` where ``bound`` limits the error caused by the
    finite window (zero for thm5, whose rules only reach four users back).
    """
    _check_p(p)
    if not WINDOW_MIN <= window <= WINDOW_MAX:
        raise ValueError(f"window must lie in [{WINDOW_MIN}, {WINDOW_MAX}], got {window}")
    if scheme == "thm5":
        polys = _thm5_polynomials(THM5_RADIUS)
        return float(np.mean([eval_pattern_polynomial(c, p) for c in polys])), 0.0
    if scheme == "scheme1":
        value = float(np.mean([eval_terms(t, p) for t in _scheme1_terms(window)]))
        return value, (1.0 - p) ** (2 * window - 4)
    raise ValueError(f"interior marginal supports scheme1 and thm5, not {scheme!r}")


def thm5_overlap(p: float) -> float:
    """Probability mass the d2 split counts twice, per user.

    Both residue-2 routes are open when ``H[i-1,i-2]`` and ``H[i,i-1]`` and
    ``H[i,i]`` are present while ``H[i-2,i-2]``, ``H[i-1,i-1]`` and
    ``H[i+1,i]`` are erased.
    """
    return p ** 3 * (1.0 - p) ** 3 / 3.0


def scheme_targets() -> dict[str, str]:
    return {"scheme1": "tau1", "scheme2": "tau2", "scheme3": "tau3",
            "thm4": "thm4_bound", "thm5": "thm5_bound"}

