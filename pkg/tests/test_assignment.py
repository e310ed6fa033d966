from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from erasenet.assignment import (InvalidLoadVector, MessageAssignment, assignment_from_load_vector,
                                 assignment_from_string, classify_string, comp_assignment, connected_fraction,
                                 irreducible_m1_assignments, load_vector, load_vector_from_string,
                                 parse_strategy)


def sets(a):
    return [set(a.T(i)) for i in range(1, a.K + 1)]


def test_string_examples():
    assert sets(assignment_from_string((1,), 4)) == [{1}, {2}, {3}, {4}]
    assert sets(assignment_from_string((2, 1, 0), 3)) == [{1}, {1}, {2}]
    a = assignment_from_string((2, 1, 0), 5)
    assert load_vector(a) == (2, 1, 0, 1, 1)
    assert a.T(4) == {4} and a.T(5) == {5}


def test_tiling_convention():
    assert load_vector_from_string((2, 1, 0), 9) == (2, 1, 0) * 3
    assert load_vector_from_string((1, 2, 1, 0), 10) == (1, 2, 1, 0, 1, 2, 1, 0, 1, 1)


def test_load_vector_examples():
    assert sets(assignment_from_load_vector((1, 1, 1))) == [{1}, {2}, {3}]
    assert sets(assignment_from_load_vector((2, 1, 0))) == [{1}, {1}, {2}]
    assert sets(assignment_from_load_vector((1, 2, 1, 0))) == [{1}, {2}, {2}, {3}]
    assert load_vector(MessageAssignment.from_sets([{1}, {1}, {2}])) == (2, 1, 0)
    assert load_vector(MessageAssignment.from_sets([{1}, {2}, {3}])) == (1, 1, 1)


@pytest.mark.parametrize("N", [(0, 2, 1), (2, 2, 0, 0), (1, 1, 0), (3, 0, 0), (1, 0, 2)])
def test_bad_load_vectors(N):
    with pytest.raises(InvalidLoadVector, match="not a valid irreducible load vector"):
        assignment_from_load_vector(N)


@given(st.integers(1, 12), st.data())
def test_load_vector_roundtrip_random(K, data):
    bits = data.draw(st.integers(0, (1 << (K - 1)) - 1 if K > 1 else 0))
    a = MessageAssignment.from_sets([{1}] + [{i - 1} if bits >> (i - 2) & 1 else {i} for i in range(2, K + 1)])
    N = load_vector(a)
    assert sum(N) == K and set(N) <= {0, 1, 2} and N[0] in (1, 2)
    assert assignment_from_load_vector(N) == a


def test_load_vector_roundtrip_exhaustive():
    for K in range(1, 13):
        seen = set()
        for a in irreducible_m1_assignments(K):
            N = load_vector(a)
            seen.add(N)
            assert assignment_from_load_vector(N) == a
        assert len(seen) == 1 << (K - 1)


@pytest.mark.parametrize("S, tag, ones", [
    ((1,), "S1", 1), ((2, 1, 1, 1, 0), "S2", 3), ((1, 1, 2, 0), "S3", 2),
    ((2, 0), "S2", 0), ((1, 2, 1, 0), "S4", 2), ((2, 1, 0), "S2", 1),
    ((1, 1, 1), "S1", 3), ((0, 2, 1), "invalid", 1), ((2, 2, 0, 0), "invalid", 0), ((1, 2), "invalid", 1),
])
def test_classify(S, tag, ones):
    f = classify_string(S)
    assert (f.tag, f.n_ones) == (tag, ones)


@given(st.lists(st.integers(0, 2), min_size=1, max_size=8))
def test_classify_total(S):
    assert classify_string(S).tag in {"S1", "S2", "S3", "S4", "invalid"}


@given(st.lists(st.integers(0, 2), min_size=1, max_size=6), st.integers(0, 12))
def test_valid_strings_give_valid_assignments(S, extra):
    if sum(S) != len(S):
        with pytest.raises(ValueError):
            assignment_from_string(S, len(S) + extra)
        return
    try:
        a = assignment_from_string(S, len(S) + extra)
    except InvalidLoadVector:
        assert classify_string(S).tag == "invalid"
        return
    assert a.M == 1 and a.is_irreducible() and a.T(1) == {1}
    assert connected_fraction(a) == 1


def test_parse_strategy():
    assert parse_strategy("2,1,0") == (2, 1, 0)
    assert parse_strategy(" 1 ") == (1,)
    for bad in ("2,1", "a,b", "3,0,0"):
        with pytest.raises(ValueError):
            parse_strategy(bad)


def test_comp_assignments():
    assert sets(comp_assignment("thm4", 5)) == [{1, 2}, {1, 2}, {2, 3}, {3, 4}, {3, 4}]
    assert sets(comp_assignment("thm5", 3)) == [{1}, {1, 2}, {2, 3}]
    with pytest.raises(ValueError):
        comp_assignment("thm4", 7)
    assert comp_assignment("thm4", 10).M == 2


def test_connected_fraction():
    assert connected_fraction(assignment_from_string((1,), 7)) == 1
    assert connected_fraction(comp_assignment("thm4", 5)) == Fraction(8, 5)
    assert connected_fraction(comp_assignment("thm4", 50)) == Fraction(8, 5)
    assert connected_fraction(comp_assignment("thm5", 100)) == 2 - Fraction(1, 100)


def test_dump():
    assert comp_assignment("thm5", 3).dump() == "1: {1}\n2: {1,2}\n3: {2,3}"
