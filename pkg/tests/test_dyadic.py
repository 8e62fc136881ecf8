import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hankellab import dyadic
from hankellab.dyadic import (DyadicInterval, DyadicRectangle, GridOpenSet, StepFunction, annulus,
                              counting_sum, embed, enlarge, f_j_measure, geometric_sum, journe_sum,
                              maximal_rects, slice_function, slice_measure)


# ------------------------------------------------------------------ oracles

def all_dyadic_rects(L, K):
    for n1 in range(-K, L + 1):
        for n2 in range(-K, L + 1):
            for m1 in range(1 << (L - n1)):
                for m2 in range(1 << (L - n2)):
                    yield DyadicRectangle(DyadicInterval(m1, n1), DyadicInterval(m2, n2))


def brute_enlarge(omega, rect_iter):
    out = omega.mask.copy()
    for (a1, b1), (a2, b2) in rect_iter:
        block = omega.mask[a1:b1, a2:b2]
        if 2 * block.sum() > block.size:
            out[a1:b1, a2:b2] = True
    return out


def dyadic_cell_boxes(omega):
    for r in all_dyadic_rects(omega.L, omega.K):
        s1, s2 = r.first.cells(omega.K), r.second.cells(omega.K)
        yield (s1.start, s1.stop), (s2.start, s2.stop)


def grid_cell_boxes(omega):
    n = omega.side
    for a1 in range(n):
        for b1 in range(a1 + 1, n + 1):
            for a2 in range(n):
                for b2 in range(a2 + 1, n + 1):
                    yield (a1, b1), (a2, b2)


def brute_maximal(omega, direction):
    out = set()
    for r in all_dyadic_rects(omega.L, omega.K):
        if not omega.contains(r):
            continue
        if direction == 2:
            if r.second.n == omega.L or not omega.contains(DyadicRectangle(r.first, r.second.parent())):
                out.add(r)
        else:
            if r.first.n == omega.L or not omega.contains(DyadicRectangle(r.first.parent(), r.second)):
                out.add(r)
    return out


def random_mask(rng, L, K, density=None):
    n = 1 << (L + K)
    return GridOpenSet(L, K, rng.random((n, n)) < (density if density is not None else rng.uniform(0.2, 0.7)))


UNIT = GridOpenSet.from_boxes(1, 4, [((0, 1), (0, 1))])

# Found by brute-force search: the dyadic enlargement more than doubles this set.
DOUBLING_COUNTEREXAMPLE = np.array([
    [0, 0, 0, 0, 0, 0, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 0],
    [0, 1, 1, 0, 1, 1, 1, 0],
    [0, 1, 0, 0, 1, 1, 0, 1],
    [0, 0, 1, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 0, 1, 0, 0],
    [1, 0, 1, 0, 0, 0, 1, 0],
    [1, 0, 1, 0, 1, 1, 1, 1]], dtype=bool)


# ------------------------------------------------------------------ intervals and sets

@given(st.integers(-4, 3), st.integers(0, 15), st.integers(-4, 3), st.integers(0, 15))
def test_nesting_dichotomy(n1, m1, n2, m2):
    a, b = DyadicInterval(m1, n1), DyadicInterval(m2, n2)
    lo, hi = max(a.start, b.start), min(a.end, b.end)
    inter = max(0.0, hi - lo)
    assert inter in (0.0, a.length, b.length)
    assert a.intersects(b) == (inter > 0)


def test_interval_basics():
    I = DyadicInterval(3, -2)
    assert (I.start, I.end, I.length, I.center) == (0.75, 1.0, 0.25, 0.875)
    assert I.parent() == DyadicInterval(1, -1)
    assert I.parent().contains(I)
    assert DyadicInterval.containing(0.8, -2) == I
    assert I.dilate(8) == (0.875 - 1.0, 0.875 + 1.0)


def test_ancestor_chain_is_unique():
    # the dyadic intervals containing a given one form a chain: no tie-breaking needed
    I = DyadicInterval(5, -3)
    chain = [I]
    while chain[-1].n < 2:
        chain.append(chain[-1].parent())
    for k, J in enumerate(chain):
        same_scale = [DyadicInterval(m, J.n) for m in range(-8, 8) if DyadicInterval(m, J.n).contains(I)]
        assert same_scale == [J]


def test_open_set_measure_and_json_roundtrip():
    rng = np.random.default_rng(1)
    omega = random_mask(rng, 1, 3)
    assert omega.measure == omega.mask.sum() * 4.0 ** -3
    back = GridOpenSet.from_json(omega.to_json())
    assert back == omega and hash(back) == hash(omega)
    assert GridOpenSet.empty(1, 3).is_empty() and GridOpenSet.empty(1, 3).measure == 0


def test_json_row_is_first_coordinate():
    omega = GridOpenSet.from_boxes(1, 1, [((0.5, 1.0), (1.5, 2.0))])
    assert omega.to_json() == '{"L": 1, "K": 1, "cells": [[1, 3]]}'


def test_from_boxes_rejects_misaligned():
    with pytest.raises(ValueError):
        GridOpenSet.from_boxes(1, 2, [((0, 0.3), (0, 1))])


def test_mask_is_read_only():
    with pytest.raises(ValueError):
        UNIT.mask[0, 0] = False


# ------------------------------------------------------------------ enlargement

def test_enlarge_examples():
    assert enlarge(GridOpenSet.empty(1, 2)).is_empty()
    assert enlarge(UNIT) == UNIT
    strip = GridOpenSet.from_boxes(1, 3, [((0, 2), (0, 1))])
    assert enlarge(strip) == strip


@pytest.mark.parametrize("seed", range(6))
def test_enlarge_matches_brute_force(seed):
    omega = random_mask(np.random.default_rng(seed), 1, 2)
    assert np.array_equal(enlarge(omega).mask, brute_enlarge(omega, dyadic_cell_boxes(omega)))
    assert np.array_equal(enlarge(omega, "grid").mask, brute_enlarge(omega, grid_cell_boxes(omega)))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_enlarge_contains_and_dyadic_inside_grid(seed):
    omega = random_mask(np.random.default_rng(seed), 0, 3)
    d, g = enlarge(omega).mask, enlarge(omega, "grid").mask
    assert (omega.mask <= d).all() and (d <= g).all()


def test_enlarge_refinement_invariant():
    omega = random_mask(np.random.default_rng(7), 1, 2)
    assert enlarge(omega).refine(1) == enlarge(omega.refine(1))


def test_enlargement_can_exceed_two():
    # the "at most double" guess fails for the dyadic variant; the constant is only recorded
    omega = GridOpenSet(0, 3, DOUBLING_COUNTEREXAMPLE)
    assert np.array_equal(enlarge(omega).mask, brute_enlarge(omega, dyadic_cell_boxes(omega)))
    assert dyadic.enlargement_constant(omega) == pytest.approx(56 / 27)
    assert dyadic.enlargement_constant(omega) > 2


def test_enlargement_constant_bounded_on_corpus():
    rng = np.random.default_rng(3)
    worst = max(dyadic.enlargement_constant(random_mask(rng, 0, 4, 0.3)) for _ in range(100))
    assert 1 <= worst < 4


# ------------------------------------------------------------------ maximal families

def test_maximal_rects_unit_square():
    omega = GridOpenSet.from_boxes(1, 2, [((0, 1), (0, 1))])
    expected = {DyadicRectangle(DyadicInterval(m, n), DyadicInterval(0, 0))
                for n in (0, -1, -2) for m in range(1 << -n)}
    assert maximal_rects(omega, 2) == expected and len(expected) == 7


def test_maximal_rects_empty():
    assert maximal_rects(GridOpenSet.empty(1, 2), 2) == set()


def test_maximal_rects_L_shape():
    omega = GridOpenSet.from_boxes(1, 2, [((0, 1), (0, 1)), ((0, 2), (0, 0.5))])
    for d in (1, 2):
        assert maximal_rects(omega, d) == brute_maximal(omega, d)


@pytest.mark.parametrize("seed", range(8))
def test_maximal_rects_brute_force(seed):
    omega = random_mask(np.random.default_rng(seed), 1, 2)
    for d in (1, 2):
        got = maximal_rects(omega, d)
        assert got == brute_maximal(omega, d)


def test_direction_one_is_transpose():
    omega = random_mask(np.random.default_rng(11), 1, 2)
    swap = {DyadicRectangle(r.second, r.first) for r in maximal_rects(omega.transpose(), 2)}
    assert maximal_rects(omega, 1) == swap


# ------------------------------------------------------------------ embedding

def test_embed_examples():
    R = DyadicRectangle(DyadicInterval(0, -2), DyadicInterval(0, 0))
    e = embed(R, UNIT)
    assert e.hat == DyadicInterval(0, 0) and e.gamma == 4
    assert embed(DyadicRectangle(DyadicInterval(0, 0), DyadicInterval(0, 0)), UNIT).gamma == 1
    with pytest.raises(ValueError, match="not a member rectangle"):
        embed(DyadicRectangle(DyadicInterval(1, 0), DyadicInterval(0, 0)), UNIT)


def test_embed_single_rectangle():
    omega = GridOpenSet.from_boxes(2, 2, [((1, 2), (0, 2))])
    R = DyadicRectangle(DyadicInterval(5, -2), DyadicInterval(0, 1))
    e = embed(R, omega)
    assert e.hat == DyadicInterval(1, 0) and e.gamma == 4


@pytest.mark.parametrize("seed", range(4))
def test_family_gamma_matches_embed(seed):
    omega = random_mask(np.random.default_rng(seed), 1, 2, 0.6)
    for d in (1, 2):
        fam = dyadic.maximal_family(omega, d)
        for r, g in zip(fam.rects(), fam.gamma):
            assert embed(r, omega, d).gamma == g >= 1


# ------------------------------------------------------------------ sums

def test_journe_examples():
    assert journe_sum(GridOpenSet.empty(1, 4), 0.5) == 0
    assert journe_sum(UNIT, 1.0) == pytest.approx(1.9375, abs=1e-15)
    with pytest.raises(ValueError):
        journe_sum(UNIT, 0.0)


@pytest.mark.parametrize("delta", [0.25, 0.5, 1.0])
def test_journe_closed_form(delta):
    K = UNIT.K
    expected = sum(2.0 ** (-n * delta) for n in range(K + 1))
    assert journe_sum(UNIT, delta) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("seed", range(4))
def test_journe_two_pass(seed):
    omega = random_mask(np.random.default_rng(seed), 1, 2, 0.6)
    tilde = enlarge(omega)
    brute = sum(embed(r, omega, 2, tilde).gamma ** -0.5 * r.area for r in brute_maximal(omega, 2))
    assert journe_sum(omega, 0.5) == pytest.approx(brute, rel=1e-12)


def test_geometric_examples():
    assert geometric_sum(GridOpenSet.empty(1, 4), (0.5, 0.5), 0, 0, 0.5) == 0
    # sum_{n=0}^{4} 2**(-n/2)
    assert geometric_sum(UNIT, (0.5, 0.5), 0, 0, 0.5) == pytest.approx(2.810660171779821, rel=1e-14)
    with pytest.raises(ValueError, match="must be < 1"):
        geometric_sum(UNIT, (0.5, 0.5), 0, 0, 1.0)


@pytest.mark.parametrize("seed", range(4))
def test_geometric_brute_force(seed):
    rng = np.random.default_rng(seed)
    omega = random_mask(rng, 1, 2, 0.6)
    tilde = enlarge(omega)
    rects = brute_maximal(omega, 2)
    for _ in range(5):
        x = rng.uniform(0, 2, 2)
        u, v = rng.choice([0, 4, 5]), rng.choice([0, 4, 5])
        brute = 0.0
        for r in rects:
            lo1, hi1 = r.first.dilate(2.0 ** u)
            lo2, hi2 = r.second.dilate(2.0 ** v)
            if lo1 <= x[0] < hi1 and lo2 <= x[1] < hi2:
                brute += embed(r, omega, 2, tilde).gamma ** 0.25 * r.area
        assert geometric_sum(omega, x, u, v, 0.25) == pytest.approx(brute, rel=1e-12)


def test_slices_and_f_j():
    assert slice_measure(UNIT, 0.5) == 1 and slice_measure(UNIT, 1.5) == 0
    shape = GridOpenSet.from_boxes(1, 2, [((0, 1), (0, 1)), ((0, 2), (0, 0.5))])
    assert np.array_equal(slice_function(shape), shape.mask.sum(axis=0) / 4)
    assert f_j_measure(UNIT, DyadicInterval(0, 0)) == 1
    assert f_j_measure(GridOpenSet.empty(1, 2), DyadicInterval(0, 0)) == 0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(-2, 0), st.data())
def test_f_j_bounded_by_slices(seed, n, data):
    omega = random_mask(np.random.default_rng(seed), 1, 2, 0.6)
    m = data.draw(st.integers(0, (2 << -n) - 1))
    J = DyadicInterval(m, n)
    tilde = enlarge(omega)
    g = slice_function(tilde)[J.cells(omega.K)]
    assert f_j_measure(omega, J) <= g.min() + 1e-15


# ------------------------------------------------------------------ counting bound

def brute_counting(g, x, lam):
    total = 0.0
    for n in range(-g.K, g.L + 1):
        for m in range(1 << (g.L - n)):
            J = DyadicInterval(m, n)
            if abs(x - J.center) < lam * J.length / 2 or x == J.center - lam * J.length / 2:
                inf = g.values[J.cells(g.K)].min()
                total += J.length * inf
    return total


def test_counting_examples():
    zero = StepFunction(0, 4, np.zeros(16))
    assert counting_sum(zero, 0.3, 1) == (0, 0)
    chi = StepFunction(0, 4, np.ones(16))
    assert counting_sum(chi, 0.3, 1) == (pytest.approx(1.9375, abs=1e-15), 6.0)
    with pytest.raises(ValueError):
        counting_sum(chi, 0.3, 0.5)
    with pytest.raises(ValueError):
        StepFunction(0, 2, [1, -1, 0, 0])


@pytest.mark.parametrize("seed", range(10))
def test_counting_brute_force(seed):
    rng = np.random.default_rng(seed)
    g = StepFunction(1, 3, np.where(rng.random(16) < 0.6, rng.exponential(size=16), 0))
    for lam in (1, 2, 3.5, 8):
        x = rng.uniform(-1, 3)
        assert counting_sum(g, x, lam)[0] == pytest.approx(brute_counting(g, x, lam), rel=1e-12, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0, 100), min_size=32, max_size=32), st.floats(-2, 4), st.sampled_from([1, 2, 4, 8]))
def test_counting_bound_holds(vals, x, lam):
    s, bound = counting_sum(StepFunction(1, 4, vals), x, lam)
    assert s <= bound


# ------------------------------------------------------------------ annuli

def test_annulus_examples():
    I = DyadicInterval(0, 0)
    assert annulus(I, 0) == ((-3.5, 4.5),)
    assert annulus(I, 4) == ((-7.5, -3.5), (4.5, 8.5))
    for u in (1, 2, 3):
        with pytest.raises(ValueError, match="excluded annulus index"):
            annulus(I, u)


def test_annuli_tile_the_line():
    I = DyadicInterval(3, -2)
    pieces = sorted(iv for u in dyadic.annulus_indices(9) for iv in annulus(I, u))
    for (a, b), (c, d) in zip(pieces, pieces[1:]):
        assert b == c  # disjoint and gap-free
    lo, hi = I.dilate(2.0 ** 9)
    assert (pieces[0][0], pieces[-1][1]) == (lo, hi)
    assert math.isclose(sum(b - a for a, b in pieces), hi - lo)
