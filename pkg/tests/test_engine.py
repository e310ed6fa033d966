import math
from fractions import Fraction

import numpy as np
import pytest

from erasenet import analysis as an
from erasenet.assignment import assignment_from_string, irreducible_m1_assignments
from erasenet.engine import (ExperimentConfig, _thm5_polynomials, eval_terms, exact_block_expectation,
                             exact_small_k, interior_marginal, lazy_terms, monte_carlo, thm5_overlap)
from erasenet.oracle import oracle_bruteforce_m1
from erasenet.schedulers import SCHEMES, schedule
from erasenet.topology import EnumerationTooLarge, LinkRealization, enumerate_realizations, realization_probability

GRID = [k / 20 for k in range(21)]


def test_block_examples():
    assert exact_block_expectation("scheme2", 0.5) == pytest.approx(0.3958333333333333, abs=1e-15)
    assert exact_block_expectation("thm4", 0) == pytest.approx(0.8, abs=1e-15)
    assert exact_block_expectation("scheme3", 1) == 0
    with pytest.raises(ValueError):
        exact_block_expectation("scheme1", 0.5)


@pytest.mark.parametrize("scheme, curve", [("scheme2", "tau2"), ("scheme3", "tau3"), ("thm4", "thm4_bound")])
def test_blocks_match_closed_forms(scheme, curve):
    for p in GRID:
        assert abs(exact_block_expectation(scheme, p) - an.eval_curve(curve, p)) <= 1e-12


def test_interior_examples():
    assert interior_marginal("thm5", 0, 4) == (pytest.approx(2 / 3, abs=1e-15), 0.0)
    v, bound = interior_marginal("scheme1", 0.5, 8)
    assert bound == 0.5 ** 12 and abs(v - 0.4) <= bound
    assert interior_marginal("scheme1", 1, 6)[0] == 0
    for w in (3, 13):
        with pytest.raises(ValueError):
            interior_marginal("scheme1", 0.5, w)
    with pytest.raises(ValueError):
        interior_marginal("scheme2", 0.5, 5)


@pytest.mark.parametrize("w", range(4, 13))
def test_scheme1_truncation_bound(w):
    for p in (0.05, 0.2, 0.4, 0.6, 0.9):
        v, bound = interior_marginal("scheme1", p, w)
        assert abs(v - an.tau1(p)) <= bound + 1e-15


def test_thm5_interior_is_closed_form_minus_overlap():
    # The two residue-2 routes of W_i share the event
    # H[i-1,i-2], H[i,i-1], H[i,i] present and H[i-2,i-2], H[i-1,i-1], H[i+1,i] erased;
    # the closed form counts it twice.
    for p in GRID:
        v, _ = interior_marginal("thm5", p, 4)
        assert abs(v - (an.thm5_bound(p) - thm5_overlap(p))) <= 1e-12
    assert thm5_overlap(0.5) == pytest.approx(1 / 192)


def test_thm5_radius_four_is_enough():
    four, five = _thm5_polynomials(4), _thm5_polynomials(5)
    from erasenet.topology import eval_pattern_polynomial
    for p in (0.1, 0.45, 0.8):
        for a, b in zip(four, five):
            assert abs(eval_pattern_polynomial(a, p) - eval_pattern_polynomial(b, p)) <= 1e-13


def test_lazy_terms_marginalizes_unread_links():
    # P(H11 present and (H21 erased or H22 present))
    terms = lazy_terms(lambda h: h(1, 1) and (not h(2, 1) or h(2, 2)))
    for p in (0.0, 0.3, 1.0):
        q = 1 - p
        assert eval_terms(terms, p) == pytest.approx(q * (p + q * q))


def _hand_value(scheme, K, p, a=None):
    total = 0.0
    for r in enumerate_realizations(K):
        n = oracle_bruteforce_m1(r, a) if scheme == "oracle" else schedule(scheme, r).count
        total += n * realization_probability(r, p)
    return total / K


def test_small_k_oracle_two_users():
    a = assignment_from_string((1,), 2)
    assert exact_small_k("oracle", 2, 0.5, a) == pytest.approx(float(Fraction(7, 16)), abs=1e-15)
    assert _hand_value("oracle", 2, 0.5, a) == pytest.approx(7 / 16, abs=1e-15)


@pytest.mark.parametrize("scheme, K", [("scheme1", 5), ("scheme2", 6), ("scheme3", 4), ("thm4", 5), ("thm5", 5)])
def test_small_k_matches_direct_sum(scheme, K):
    for p in (0.0, 0.37, 1.0):
        assert exact_small_k(scheme, K, p) == pytest.approx(_hand_value(scheme, K, p), abs=1e-12)


def test_small_k_endpoints():
    for scheme, K in (("scheme1", 7), ("thm5", 6)):
        assert exact_small_k(scheme, K, 0) == schedule(scheme, LinkRealization.full(K)).count / K
        assert exact_small_k(scheme, K, 1) == 0


def test_small_k_scheme2_equals_block():
    assert exact_small_k("scheme2", 9, 0.3) == pytest.approx(exact_block_expectation("scheme2", 0.3), abs=1e-14)


def test_small_k_errors():
    with pytest.raises(EnumerationTooLarge):
        exact_small_k("scheme1", 14, 0.5)
    with pytest.raises(ValueError):
        exact_small_k("oracle", 3, 0.5)
    with pytest.raises(ValueError):
        exact_small_k("oracle", 4, 0.5, assignment_from_string((1,), 3))


def test_convex_upper_bound():
    K = 10
    a = assignment_from_string((2, 1, 1, 1, 0), K)
    for p in (0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9):
        assert exact_small_k("oracle", K, p, a) <= an.convex_s2(p, 3) + 2 / K


def test_tdma_converse_k6():
    K = 6
    best = [assignment_from_string(S, K) for S in ((1,), (2, 1, 0), (1, 2, 1, 0))]
    for p in (0.1, 0.3, 0.5, 0.7, 0.9):
        top = max(exact_small_k("oracle", K, p, b) for b in best)
        for a in irreducible_m1_assignments(K):
            assert exact_small_k("oracle", K, p, a) <= top + 2 / K


def test_mc_example_scheme2():
    est = monte_carlo(ExperimentConfig("scheme2", 3000, (0.2,), 200, 0, 6))[0]
    assert abs(est.mean - an.tau2(0.2)) <= 3 * est.std_error
    assert (est.trials, est.K, est.trim) == (200, 3000, 6)


@pytest.mark.parametrize("scheme", SCHEMES + ("oracle",))
def test_mc_at_p1_is_zero(scheme):
    est = monte_carlo(ExperimentConfig(scheme, 60, (1.0,), 5, 3, 6))[0]
    assert est.mean == 0 and est.std_error == 0


def test_mc_deterministic_across_threads():
    cfg = ExperimentConfig("thm5", 900, (0.2, 0.6), 150, 42, 6)
    assert monte_carlo(cfg, threads=1) == monte_carlo(cfg, threads=3)
    assert monte_carlo(cfg, threads=1) != monte_carlo(ExperimentConfig("thm5", 900, (0.2, 0.6), 150, 43, 6), threads=1)


@pytest.mark.parametrize("scheme", ["scheme2", "scheme3", "thm4"])
def test_mc_matches_block_values(scheme):
    cfg = ExperimentConfig(scheme, 1200, (0.15, 0.5, 0.85), 200, 1, 6)
    for est in monte_carlo(cfg):
        assert abs(est.mean - exact_block_expectation(scheme, est.p)) <= 4 * est.std_error


def test_mc_matches_interior_values():
    for scheme in ("scheme1", "thm5"):
        cfg = ExperimentConfig(scheme, 1200, (0.15, 0.5, 0.85), 200, 2, 6)
        for est in monte_carlo(cfg):
            v, bound = interior_marginal(scheme, est.p, 12)
            assert abs(est.mean - v) <= 4 * est.std_error + bound


def test_mc_thm5_near_one():
    est = monte_carlo(ExperimentConfig("thm5", 3000, (0.999,), 500, 0, 6))[0]
    assert 1.8 <= est.mean / 0.001 <= 2.2


def test_trim_sufficiency():
    a = monte_carlo(ExperimentConfig("thm5", 3000, (0.3,), 200, 5, 6))[0]
    b = monte_carlo(ExperimentConfig("thm5", 3000, (0.3,), 200, 5, 12))[0]
    assert abs(a.mean - b.mean) < 3 * math.hypot(a.std_error, b.std_error)


def test_std_error_scaling():
    se = [monte_carlo(ExperimentConfig("scheme1", 300, (0.4,), n, 8, 6))[0].std_error for n in (100, 400, 1600)]
    for small, big in zip(se, se[1:]):
        assert 0.8 * 2 <= small / big <= 1.2 * 2


def test_oracle_mc_runs():
    est = monte_carlo(ExperimentConfig("oracle", 300, (0.5,), 40, 0, 6, (1, 2, 1, 0)))[0]
    assert abs(est.mean - an.tau3(0.5)) <= 4 * est.std_error + 0.02


@pytest.mark.parametrize("kw", [dict(scheme="thm4", K=301), dict(scheme="scheme2", K=100),
                                dict(scheme="nope", K=30), dict(scheme="scheme1", K=12, trim=6),
                                dict(scheme="scheme1", K=30, p_grid=(1.2,)), dict(scheme="scheme1", K=30, trials=0),
                                dict(scheme="oracle", K=30, strategy=(2, 2, 0))])
def test_config_validation(kw):
    base = dict(p_grid=(0.5,), trials=10)
    with pytest.raises(ValueError):
        ExperimentConfig(**{**base, **kw})
