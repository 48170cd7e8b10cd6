import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import TaggedBuffer, random_ops
from teletype.edit_range import EMPTY, Delete, EditRange, Insert, Modify, apply_edit, overlaps, reset


def run(ops, start=EMPTY):
    rng = start
    for op in ops:
        rng = apply_edit(rng, op)
    return rng


def test_first_edit():
    assert apply_edit(EMPTY, Modify(10, 10)) == EditRange(10, 10)


def test_far_apart_edits_cover_the_gap():
    assert apply_edit(EditRange(5, 5), Modify(12, 12)) == EditRange(5, 12)


def test_insert_above_joins_and_shifts():
    assert apply_edit(EditRange(5, 12), Insert(3, 2)) == EditRange(3, 14)


def test_insert_below_does_not_move_interval():
    assert apply_edit(EditRange(5, 12), Insert(20, 2)) == EditRange(5, 21)
    assert apply_edit(EditRange(5, 12), Insert(13, 1)) == EditRange(5, 13)


def test_deletions_shift_shrink_and_empty():
    assert apply_edit(EditRange(5, 12), Delete(1, 2)) == EditRange(3, 10)
    assert apply_edit(EditRange(5, 12), Delete(6, 2)) == EditRange(5, 10)
    assert apply_edit(EditRange(5, 12), Delete(20, 2)) == EditRange(5, 12)
    assert apply_edit(EditRange(5, 12), Delete(3, 20)) == EMPTY
    assert apply_edit(EMPTY, Delete(3, 2)) == EMPTY


def test_width_and_membership():
    r = EditRange(5, 12)
    assert r.width == 8 and 5 in r and 12 in r and 13 not in r
    assert EMPTY.width == 0 and EMPTY.empty


def test_bad_arguments_are_rejected():
    with pytest.raises(ValueError):
        EditRange(0, 3)
    with pytest.raises(ValueError):
        EditRange(4, 3)
    with pytest.raises(ValueError):
        Modify(4, 3)
    with pytest.raises(ValueError):
        Insert(1, 0)
    with pytest.raises(ValueError):
        Delete(0, 1)


def test_overlap_examples():
    r = EditRange(5, 12)
    assert overlaps(r, 12, 12)
    assert not overlaps(r, 13, 20)
    assert not overlaps(EMPTY, 1, 100)


def test_reset():
    assert reset(EditRange(1, 9)) == EMPTY
    assert reset(EMPTY) == EMPTY


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 30), st.integers(0, 30), st.integers(1, 40), st.integers(1, 40))
def test_overlap_matches_line_enumeration(a, w, s, ew):
    r = EditRange(a, a + w)
    e = s + ew - 1
    assert overlaps(r, s, e) == bool(set(range(a, a + w + 1)) & set(range(s, e + 1)))


def check_sequence(n_lines, ops):
    buf = TaggedBuffer(n_lines)
    rng = EMPTY
    for op in ops:
        rng = apply_edit(rng, op)
        buf.apply(op)
        lines = buf.lines()
        if not lines:
            assert rng.empty
            continue
        # coverage and minimality: the interval is exactly the tracked hull
        assert set(range(rng.start, rng.end + 1)) >= lines
        assert rng.start in lines and rng.end in lines
        assert rng.width >= 0


@settings(max_examples=500, deadline=None)
@given(st.integers(0, 40), st.integers(0, 2**32), st.integers(1, 25))
def test_tracker_matches_tagged_buffer(n_lines, seed, count):
    check_sequence(n_lines, random_ops(random.Random(seed), n_lines, count))


def test_tracker_matches_tagged_buffer_seeded_1000():
    rng = random.Random(99)
    for _ in range(1000):
        n = rng.randint(0, 60)
        check_sequence(n, random_ops(rng, n, rng.randint(1, 30)))
