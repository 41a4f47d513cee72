import itertools
import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lipwidth.errors import BadParams, InfiniteEffectiveDimension, OutOfRange, ResourceLimit, SetTooLarge
from lipwidth.index_sets import (
    MultiIndex,
    enumerate_rearrangement,
    is_downward_closed,
    s_epsilon_set,
    sobolev_weight,
    td_index_set,
    td_size_bounds,
)
from lipwidth.spectrum import Algebraic, DoubleExponential, Explicit, Exponential, make_spectrum


def box_oracle(lam_b, k, box=30):
    """First k of an exhaustive sort over {0..box}^d.

    The box grows until it provably holds the first k: every index outside
    it has some entry > box and so costs at least (box + 1) / max(lam_b).
    """
    while True:
        rows = _box(lam_b, box)
        if len(rows) >= k and rows[k - 1][0] < (box + 1) / max(lam_b):
            return rows[:k]
        box *= 2


def _box(lam_b, box):
    rows = []
    for nu in itertools.product(range(box + 1), repeat=len(lam_b)):
        c = math.fsum(v / l for v, l in zip(nu, lam_b))
        rows.append((c, sum(nu), nu))
    rows.sort(key=lambda r: r[0])
    return rows


def explicit(vals):
    return make_spectrum(Explicit(tuple(vals)), "ones", len(vals))


def test_weight_examples():
    s = explicit((1, 0.5))
    assert sobolev_weight(MultiIndex.zero(), s) == 1.0
    assert sobolev_weight(MultiIndex.unit(1), s) == pytest.approx(2 ** -0.5)
    assert sobolev_weight(MultiIndex.parse("1:1,2:1"), s) == pytest.approx(0.5)
    with pytest.raises(OutOfRange):
        sobolev_weight(MultiIndex.unit(3), s)


def test_enumeration_small_example():
    r = enumerate_rearrangement(explicit((1, 0.5)), 4)
    assert [str(g) for g in r.indices] == ["0", "1:1", "2:1", "1:2"]
    np.testing.assert_allclose(r.weights, [1, 2 ** -0.5, 3 ** -0.5, 3 ** -0.5])


def test_enumeration_constant_spectrum_uncertified():
    r = enumerate_rearrangement(make_spectrum(Algebraic(1), "sqrt-lambda"), 3)
    assert not r.certified
    np.testing.assert_allclose(r.weights, [1, 2 ** -0.5, 2 ** -0.5])


def test_enumeration_k1():
    for s in (make_spectrum(Algebraic(2)), explicit((1,))):
        r = enumerate_rearrangement(s, 1)
        assert r.indices == [MultiIndex.zero()] and r.weights == [1.0]
    with pytest.raises(BadParams):
        enumerate_rearrangement(make_spectrum(Algebraic(2)), 0)


@pytest.mark.parametrize("seed", range(10))
def test_enumeration_matches_box(seed):
    rng = random.Random(seed)
    d = rng.randint(1, 3)
    lam = sorted((rng.uniform(0.05, 1.0) for _ in range(d)), reverse=True)
    # occasionally force exact ties
    if d >= 2 and seed % 3 == 0:
        lam[1] = lam[0] / 2
    k = 200
    r = enumerate_rearrangement(explicit(lam), k)
    want = box_oracle(lam, k)
    np.testing.assert_allclose(sorted(r.costs), [w[0] for w in want], rtol=1e-12, atol=0)
    np.testing.assert_allclose(r.weights, [1 / math.sqrt(1 + w[0]) for w in want], rtol=1e-12)


def test_ties_ordered_by_degree_then_entries():
    r = enumerate_rearrangement(explicit((1, 0.5, 0.5)), 20)
    for a, b in zip(r.items, r.items[1:]):
        assert a.cost <= b.cost * (1 + 1e-12)
        if abs(a.cost - b.cost) <= 1e-12 * max(a.cost, 1):
            assert a.index.sort_key() <= b.index.sort_key()


def test_certificate_is_sound():
    s = make_spectrum(Algebraic(2))
    r = enumerate_rearrangement(s, 500)
    assert r.certified
    assert r.costs[-1] < s.inverse_weighted(r.dim_used + 1)


@pytest.mark.parametrize("fam", [Algebraic(1.5), Exponential(1, 1), DoubleExponential(1)])
def test_prefixes_downward_closed(fam):
    r = enumerate_rearrangement(make_spectrum(fam), 300)
    for s in (1, 2, 5, 17, 60, 300):
        assert is_downward_closed(r.indices[:s])


def test_weights_monotone_under_order():
    s = make_spectrum(Exponential(1, 1))
    for g in enumerate_rearrangement(s, 100).indices:
        for p in g.decrements():
            assert sobolev_weight(p, s) >= sobolev_weight(g, s)
        assert 0 < sobolev_weight(g, s) <= 1


def test_resource_limit():
    with pytest.raises(ResourceLimit):
        enumerate_rearrangement(make_spectrum(Algebraic(2)), 5000, max_pops=100)


def test_csv_and_json():
    r = enumerate_rearrangement(explicit((1, 0.5)), 3)
    lines = r.to_csv().splitlines()
    assert lines[0] == "rank,cost,weight,index"
    assert lines[2] == "2,1,0.70710678118654746,1:1"
    assert r.to_dict()["items"][0]["index"] == "0"


def test_td_examples():
    assert td_index_set([0.5]).members == ((0,), (1,), (2,))
    assert set(td_index_set([0.5, 1]).members) == {(0, 0), (1, 0), (2, 0), (0, 1)}
    assert td_index_set([2]).members == ((0,),)
    assert td_size_bounds([0.5, 1]) == pytest.approx((1, 4.5))
    assert td_size_bounds([1]) == pytest.approx((1, 2))
    assert td_size_bounds([2]) == pytest.approx((0.5, 1.5))


def test_td_rejects_bad_weights():
    for a in ([], [1, 0.5], [0, 1], [math.inf]):
        with pytest.raises(BadParams):
            td_index_set(a)
    with pytest.raises(SetTooLarge):
        td_index_set([1e-3] * 4, cap=1e6)


def td_oracle(a):
    box = [int(1 / x) + 1 for x in a]
    return {
        nu
        for nu in itertools.product(*(range(b + 1) for b in box))
        if math.fsum(x * v for x, v in zip(a, nu)) <= 1 + 1e-12
    }


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0.08, 1.5), min_size=1, max_size=4))
def test_td_matches_oracle_and_sandwich(a):
    a = sorted(a)
    t = td_index_set(a)
    assert set(t.members) == td_oracle(a)
    lo, hi = td_size_bounds(a)
    assert lo <= len(t) <= hi
    assert is_downward_closed(t.multi_indices())
    degs = [sum(nu) for nu in t.members]
    assert degs == sorted(degs)


def test_s_epsilon_examples():
    assert set(s_epsilon_set(explicit((1, 0.5)), 1.0).members) == {(0,), (1,)}
    assert s_epsilon_set(make_spectrum(Algebraic(2)), 2.0).members == ((0,),)
    with pytest.raises(InfiniteEffectiveDimension):
        s_epsilon_set(make_spectrum(Algebraic(1), "sqrt-lambda"), 0.5)
    with pytest.raises(InfiniteEffectiveDimension):
        s_epsilon_set(explicit((1, 1, 1)), 0.5)


@pytest.mark.parametrize("eps", [0.5, 0.3, 0.2])
def test_s_epsilon_is_rearrangement_prefix(eps):
    s = make_spectrum(Algebraic(2))
    S = s_epsilon_set(s, eps)
    r = enumerate_rearrangement(s, len(S))
    assert r.certified
    costs = sorted(math.fsum(v * s.inverse_weighted(i) for i, v in enumerate(nu, 1)) for nu in S.members)
    np.testing.assert_allclose(costs, r.costs, rtol=1e-12)
    assert max(costs) <= 1 / eps**2 * (1 + 1e-12)
