"""Closed-form average per-user DoF curves and their limits."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from scipy.optimize import bisect

CURVES = ("tau1", "tau2", "tau3", "tau_tdma", "thm4_bound", "thm5_bound", "convex_s2", "convex_s4")
ALIASES = {"thm4": "thm4_bound", "thm5": "thm5_bound"}
CROSSOVER_XTOL = 1e-9


@dataclass(frozen=True)
class CurveId:
    tag: str
    n: int | None = None

    def __post_init__(self):
        tag = ALIASES.get(self.tag, self.tag)
        object.__setattr__(self, "tag", tag)
        if tag not in CURVES:
            raise ValueError(f"unknown curve {self.tag!r}; choose from {', '.join(CURVES)}")
        if tag.startswith("convex"):
            if self.n is None or self.n < 1:
                raise ValueError(f"{tag} needs a number of ones n >= 1")

    @classmethod
    def parse(cls, text: str) -> "CurveId":
        """``tau1`` or ``convex_s2:3``."""
        tag, _, n = text.partition(":")
        return cls(tag, int(n) if n else None)

    def __str__(self):
        return self.tag if self.n is None else f"{self.tag}:{self.n}"


def _as_curve(c) -> CurveId:
    return c if isinstance(c, CurveId) else CurveId.parse(c)


def _check_p(p: float) -> None:
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"erasure probability must lie in [0, 1], got {p}")


def tau1(p: float) -> float:
    q = 1.0 - p
    w = 1.0 - q * q
    # geometric sum of the odd atomic-run bonus
    return 0.5 * (q + q * w * w) + 0.5 * w * q ** 5 / (1.0 + q * q)


def tau1_series(p: float, terms: int) -> float:
    q = 1.0 - p
    w = 1.0 - q * q
    head = 0.5 * (q + q * w * w)
    return head + sum(0.5 * w * w * q ** (4 * i + 1) for i in range(1, terms + 1))


def tau2(p: float) -> float:
    q = 1.0 - p
    return 2.0 / 3.0 * q + 1.0 / 3.0 * p * q * (1.0 - q * q)


def tau3(p: float) -> float:
    q = 1.0 - p
    return 0.5 * q + 0.25 * q * (1.0 - q * q) * (1.0 + p + q ** 3)


def thm4_bound(p: float) -> float:
    q = 1.0 - p
    A = p + 1.0 - q * q * (1.0 - p * q) - 0.5 * p * q
    return 0.4 * q * (2.0 + A * p)


def thm4_f(p: float) -> float:
    q = 1.0 - p
    return p * q * (1.0 - q * q * (1.0 - p * q))


def thm5_bound(p: float) -> float:
    q = 1.0 - p
    B = 3.0 + (1.0 + q ** 3) * (1.0 - q * q + p * q ** 3) + p * (1.0 + q * q)
    return q * (1.0 + q ** 3 + B * p) / 3.0


def thm5_components(p: float) -> tuple[float, float, float, float]:
    """Per-residue delivery terms ``(d0, d1, d2_1, d2_2)`` of the {i-1, i} scheme."""
    _check_p(p)
    q = 1.0 - p
    d0 = q * (1.0 + p)
    d1 = 2.0 * p * q + q ** 4
    d2_1 = p * q * (1.0 + q ** 3) * (1.0 - q * q + p * q ** 3)
    d2_2 = p * p * q * (1.0 + q * q)
    return d0, d1, d2_1, d2_2


def convex_s2(p: float, n: int) -> float:
    if n % 2:
        return (n - 1) / (n + 2) * tau1(p) + 3 / (n + 2) * tau2(p)
    return n / (n + 2) * tau1(p) + 2 / (n + 2) * tau2(p)


def convex_s4(p: float, n: int) -> float:
    return (n - 2) / (n + 2) * tau1(p) + 4 / (n + 2) * tau3(p)


def eval_curve(curve, p: float) -> float:
    c = _as_curve(curve)
    _check_p(p)
    if c.tag == "tau1":
        return tau1(p)
    if c.tag == "tau2":
        return tau2(p)
    if c.tag == "tau3":
        return tau3(p)
    if c.tag == "tau_tdma":
        return max(tau1(p), tau2(p), tau3(p))
    if c.tag == "thm4_bound":
        return thm4_bound(p)
    if c.tag == "thm5_bound":
        return thm5_bound(p)
    if c.tag == "convex_s2":
        return convex_s2(p, c.n)
    return convex_s4(p, c.n)


_LIMITS = {
    "tau1": Fraction(1),
    "tau2": Fraction(1),
    "tau3": Fraction(1),
    "thm4_bound": Fraction(8, 5),
    "thm5_bound": Fraction(2),
}


def limit_ratio(curve) -> Fraction:
    """Limit of ``curve(p) / (1 - p)`` as ``p -> 1``."""
    c = _as_curve(curve)
    try:
        return _LIMITS[c.tag]
    except KeyError:
        raise ValueError(f"no limit ratio for {c}; supported: {', '.join(_LIMITS)}") from None


def normalized(curve, p: float) -> float:
    """``curve(p) / (1 - p)``, taking the analytic limit at ``p = 1``."""
    c = _as_curve(curve)
    if p == 1.0:
        if c.tag == "tau_tdma":
            return 1.0
        return float(limit_ratio(c))
    return eval_curve(c, p) / (1.0 - p)


def find_crossover(a, b, lo: float, hi: float) -> float:
    """Bisection root of ``curve_a - curve_b`` on ``[lo, hi]``."""
    ca, cb = _as_curve(a), _as_curve(b)

    def diff(p):
        return eval_curve(ca, p) - eval_curve(cb, p)

    flo, fhi = diff(lo), diff(hi)
    if flo == 0.0 and fhi == 0.0:
        raise ValueError(f"no sign change for {ca} - {cb} on [{lo}, {hi}]: the curves coincide at both ends")
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    if (flo > 0) == (fhi > 0):
        raise ValueError(f"no sign change for {ca} - {cb} on [{lo}, {hi}]")
    return bisect(diff, lo, hi, xtol=CROSSOVER_XTOL)
