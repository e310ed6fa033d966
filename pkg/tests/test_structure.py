import numpy as np
from hypothesis import given
from hypothesis import strategies as st

from erasenet.assignment import assignment_from_string, irreducible_m1_assignments
from erasenet.structure import atomic_runs, render_ranges, split_subnetworks
from erasenet.topology import LinkRealization, enumerate_realizations

S1 = (1,)


def spans(ranges):
    return [(r.start, r.end, r.atomic) for r in ranges]


def test_examples():
    full = LinkRealization.full(3)
    assert spans(split_subnetworks(full, assignment_from_string(S1, 3))) == [(1, 3, True)]
    r = LinkRealization.from_flags([0, 1, 1, 1], [1, 1, 1])
    assert spans(split_subnetworks(r, assignment_from_string(S1, 4))) == [(1, 1, False), (2, 4, True)]
    r = LinkRealization.from_flags([1, 1], [0])
    assert spans(split_subnetworks(r, assignment_from_string(S1, 2))) == [(1, 1, True), (2, 2, True)]
    assert render_ranges(split_subnetworks(LinkRealization.from_flags([0, 1, 1, 1], [1, 1, 1]),
                                           assignment_from_string(S1, 4))) == "[1] [2 3 4]*"


def _check_partition(r, a):
    ranges = split_subnetworks(r, a)
    assert ranges[0].start == 1 and ranges[-1].end == r.K
    for left, right in zip(ranges, ranges[1:]):
        assert right.start == left.end + 1
        # nothing in the left range reaches the first receiver of the right one
        i = right.start
        for j in left.users():
            t = next(iter(a.T(j)))
            assert not (r.present(j, t) and r.present(i, t))
    for rg in ranges:
        if rg.atomic:
            assert all(r.present(i, next(iter(a.T(i)))) for i in rg.users())


def test_partition_exhaustive_k5():
    for a in irreducible_m1_assignments(5):
        for r in enumerate_realizations(5):
            _check_partition(r, a)


@given(st.integers(1, 14), st.data())
def test_partition_random(K, data):
    mask = data.draw(st.integers(0, (1 << (2 * K - 1)) - 1))
    bits = data.draw(st.integers(0, (1 << (K - 1)) - 1 if K > 1 else 0))
    a = [{1}] + [{i - 1} if bits >> (i - 2) & 1 else {i} for i in range(2, K + 1)]
    from erasenet.assignment import MessageAssignment
    _check_partition(LinkRealization(K, mask), MessageAssignment.from_sets(a))


def test_atomic_runs_cover_atomic_subnetworks():
    K = 7
    a = assignment_from_string(S1, K)
    for r in enumerate_realizations(K):
        d, x = r.arrays()
        s, e = atomic_runs(d, x)
        for rg in split_subnetworks(r, a):
            if rg.atomic:
                # an atomic subnetwork under T_i = {i} is a single maximal run
                assert all(s[i - 1] == rg.start and e[i - 1] == rg.end for i in rg.users())
            else:
                # a non-atomic range is a run prefix followed by its erased last user
                assert not d[rg.end - 1]
                inner = range(rg.start, rg.end)
                assert all(s[i - 1] == rg.start and e[i - 1] == rg.end - 1 for i in inner)


def test_atomic_runs_batch_shape():
    d = np.ones((2, 3, 5), dtype=bool)
    x = np.ones((2, 3, 4), dtype=bool)
    d[1, 2, 2] = False
    s, e = atomic_runs(d, x)
    assert s.shape == d.shape
    assert list(s[0, 0]) == [1] * 5 and list(e[0, 0]) == [5] * 5
    assert list(s[1, 2]) == [1, 1, 0, 4, 4] and list(e[1, 2]) == [2, 2, 0, 5, 5]
