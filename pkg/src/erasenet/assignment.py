"""Message assignments: transmit sets, load vectors and ternary strategy strings."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence


class InvalidLoadVector(ValueError):
    pass


@dataclass(frozen=True)
class MessageAssignment:
    """Transmit sets ``T_i`` (1-based transmitter indices) for a K-user network."""

    K: int
    transmit_sets: tuple[frozenset, ...]

    def __post_init__(self):
        if len(self.transmit_sets) != self.K:
            raise ValueError("need one transmit set per receiver")
        for i, T in enumerate(self.transmit_sets, start=1):
            if not T:
                raise ValueError(f"empty transmit set for message {i}")
            if any(not 1 <= t <= self.K for t in T):
                raise ValueError(f"transmit set of message {i} leaves [1, {self.K}]")

    @classmethod
    def from_sets(cls, sets: Sequence) -> "MessageAssignment":
        return cls(len(sets), tuple(frozenset(s) for s in sets))

    @property
    def M(self) -> int:
        return max(len(T) for T in self.transmit_sets)

    def T(self, i: int) -> frozenset:
        return self.transmit_sets[i - 1]

    def is_irreducible(self) -> bool:
        """Every carrier of ``W_i`` can be connected to receiver ``i``."""
        return all(T <= {i - 1, i} for i, T in enumerate(self.transmit_sets, start=1))

    def carriers(self) -> tuple[int, ...]:
        """Single carrier per message; only defined for M = 1."""
        if self.M != 1:
            raise ValueError("carriers() needs a cooperation order of 1")
        return tuple(next(iter(T)) for T in self.transmit_sets)

    def dump(self) -> str:
        return "\n".join(f"{i}: {{{','.join(str(t) for t in sorted(T))}}}"
                         for i, T in enumerate(self.transmit_sets, start=1))


def parse_strategy(text: str) -> tuple[int, ...]:
    try:
        values = tuple(int(v) for v in text.replace(" ", "").split(","))
    except ValueError:
        raise ValueError(f"malformed strategy string {text!r}; expected e.g. 2,1,0") from None
    validate_strategy(values)
    return values


def validate_strategy(S: Sequence[int]) -> None:
    if not S:
        raise ValueError("empty strategy string")
    if any(v not in (0, 1, 2) for v in S):
        raise ValueError(f"strategy entries must be 0, 1 or 2: {tuple(S)}")
    if sum(S) != len(S):
        raise ValueError(f"strategy entries must sum to its length {len(S)}: {tuple(S)}")


@dataclass(frozen=True)
class StringForm:
    tag: str
    n_ones: int


def classify_string(S: Sequence[int]) -> StringForm:
    S = tuple(S)
    ones = S.count(1)
    try:
        validate_strategy(S)
    except ValueError:
        return StringForm("invalid", ones)
    if all(v == 1 for v in S):
        return StringForm("S1", ones)
    if S[-1] != 0 or S.count(2) != 1 or S.count(0) != 1:
        return StringForm("invalid", ones)
    y = S.index(2)
    if y == 0:
        return StringForm("S2", ones)
    if y == len(S) - 2:
        return StringForm("S3", ones)
    return StringForm("S4", ones)


def assignment_from_load_vector(N: Sequence[int]) -> MessageAssignment:
    """Rebuild the unique irreducible M=1 assignment with load vector ``N``."""
    N = tuple(int(v) for v in N)
    K = len(N)
    if K == 0:
        raise InvalidLoadVector("empty load vector")
    if sum(N) != K or any(v not in (0, 1, 2) for v in N):
        raise InvalidLoadVector(f"not a valid irreducible load vector: {N}")
    sets: list = [None] * K
    start = 1
    while start <= K:
        zeros = [j for j in range(start, K + 1) if N[j - 1] == 0]
        if not zeros:
            if any(N[j - 1] != 1 for j in range(start, K + 1)):
                raise InvalidLoadVector(f"not a valid irreducible load vector: {N}")
            for j in range(start, K + 1):
                sets[j - 1] = {j}
            break
        x = zeros[0]
        seg = N[start - 1:x - 1]
        if x == start or seg.count(2) != 1 or sum(seg) != x - start + 1:
            raise InvalidLoadVector(f"not a valid irreducible load vector: {N}")
        y = start + seg.index(2)
        for j in range(start, y + 1):
            sets[j - 1] = {j}
        for j in range(y + 1, x + 1):
            sets[j - 1] = {j - 1}
        start = x + 1
    return MessageAssignment.from_sets(sets)


def load_vector(a: MessageAssignment) -> tuple[int, ...]:
    N = [0] * a.K
    for T in a.transmit_sets:
        if len(T) == 1:
            N[next(iter(T)) - 1] += 1
    return tuple(N)


def load_vector_from_string(S: Sequence[int], K: int) -> tuple[int, ...]:
    S = tuple(S)
    validate_strategy(S)
    n = len(S)
    if K < n:
        raise ValueError(f"K={K} is shorter than the strategy string (n={n})")
    whole = n * (K // n)
    # 1-based reading of "S_{i mod n}": position i uses S[(i-1) mod n]
    return tuple(S[(i - 1) % n] if i <= whole else 1 for i in range(1, K + 1))


def assignment_from_string(S: Sequence[int], K: int) -> MessageAssignment:
    return assignment_from_load_vector(load_vector_from_string(S, K))


def irreducible_m1_assignments(K: int) -> Iterator[MessageAssignment]:
    """Every irreducible assignment with one carrier per message."""
    for bits in range(1 << max(K - 1, 0)):
        sets = [{1}]
        for i in range(2, K + 1):
            sets.append({i - 1} if bits >> (i - 2) & 1 else {i})
        yield MessageAssignment.from_sets(sets)


def comp_assignment(kind: str, K: int) -> MessageAssignment:
    """Fixed M=2 assignments: ``thm4`` (blocks of five) and ``thm5`` ({i-1, i})."""
    if K < 1:
        raise ValueError("K must be positive")
    if kind == "thm4":
        if K % 5:
            raise ValueError(f"thm4 assignment needs K divisible by 5, got K={K}")
        sets = []
        for i in range(1, K + 1):
            if i % 5 == 1:
                sets.append({i, i + 1})
            elif i % 5 == 0:
                sets.append({i - 1, i - 2})
            else:
                sets.append({i - 1, i})
        return MessageAssignment.from_sets(sets)
    if kind == "thm5":
        return MessageAssignment.from_sets([{i - 1, i} & set(range(1, K + 1)) for i in range(1, K + 1)])
    raise ValueError(f"unknown CoMP assignment {kind!r}; use thm4 or thm5")


def connected_fraction(a: MessageAssignment) -> Fraction:
    """Average number of carriers per message that can reach its receiver."""
    total = sum(len(T & {i - 1, i}) for i, T in enumerate(a.transmit_sets, start=1))
    return Fraction(total, a.K)
