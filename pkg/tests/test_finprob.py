import itertools
import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hvlab.errors import ConditioningError, InputError
from hvlab.finprob import (
    FiniteDistribution,
    JointTable,
    RandomVariable,
    SampleSpace,
    check_mutual_independence,
    condition,
    independence_residual,
    make_rng,
    product_measure,
    push_forward,
    sample,
    sample_indices,
)


def coin(p_heads=0.5, name="c"):
    return SampleSpace.from_weights(("H", "T"), (p_heads, 1 - p_heads))


weights_st = st.lists(st.floats(0.01, 10.0), min_size=1, max_size=6).map(
    lambda ws: tuple(w / math.fsum(ws) for w in ws)
)


class TestDistribution:
    def test_rejects_negative(self):
        with pytest.raises(InputError):
            FiniteDistribution((1.2, -0.2))

    def test_rejects_unnormalized(self):
        with pytest.raises(InputError):
            FiniteDistribution((0.5, 0.4))

    def test_rejects_empty(self):
        with pytest.raises(InputError):
            FiniteDistribution(())

    def test_space_rejects_duplicate_atoms(self):
        with pytest.raises(InputError):
            SampleSpace.uniform(["x", "x"])

    def test_space_rejects_length_mismatch(self):
        with pytest.raises(InputError):
            SampleSpace(("a", "b"), FiniteDistribution((1.0,)))


class TestProductMeasure:
    def test_two_fair_coins(self):
        space = product_measure([coin(), coin()])
        assert len(space) == 4
        assert all(w == 0.25 for w in space.dist)

    def test_single_factor_is_isomorphic(self):
        base = SampleSpace.from_weights("abc", (0.2, 0.3, 0.5))
        space = product_measure([base])
        assert space.atoms == (("a",), ("b",), ("c",))
        assert space.dist.weights == pytest.approx(base.dist.weights, abs=1e-15)

    def test_unequal_factors(self):
        a = SampleSpace.from_weights((0, 1), (1 / 3, 2 / 3))
        b = SampleSpace.from_weights((0, 1), (1 / 2, 1 / 2))
        space = product_measure([a, b])
        assert space.dist.weights == pytest.approx((1 / 6, 1 / 6, 1 / 3, 1 / 3), abs=1e-15)

    def test_empty_is_error(self):
        with pytest.raises(InputError):
            product_measure([])

    def test_projections(self):
        space = product_measure([coin(0.3), coin(0.6)])
        x, y = space.projections(["X", "Y"])
        assert push_forward(space, [x]).prob("H") == pytest.approx(0.3)
        assert push_forward(space, [y]).prob("H") == pytest.approx(0.6)


class TestPushForward:
    def test_identity(self):
        space = SampleSpace.from_weights("abc", (0.2, 0.3, 0.5))
        table = push_forward(space, [space.identity()])
        assert [table.prob(a) for a in "abc"] == list(space.dist.weights)

    def test_constant(self):
        space = SampleSpace.uniform(range(5))
        rv = RandomVariable.from_function("K", space, lambda _: "k", ("j", "k"))
        table = push_forward(space, [rv])
        assert table.prob("k") == pytest.approx(1.0)
        assert table.prob("j") == 0.0

    def test_projections_give_product(self):
        a = SampleSpace.from_weights((0, 1, 2), (0.1, 0.3, 0.6))
        b = SampleSpace.from_weights(("u", "v"), (0.25, 0.75))
        space = product_measure([a, b])
        table = push_forward(space, space.projections(["A", "B"]))
        expected = np.outer(a.dist.as_array(), b.dist.as_array())
        assert np.max(np.abs(table.to_array() - expected)) < 1e-15

    def test_undefined_rv(self):
        space = SampleSpace.uniform("ab")
        rv = RandomVariable("X", (0, 1), {"a": 0})
        with pytest.raises(InputError):
            push_forward(space, [rv])

    def test_value_outside_codomain(self):
        with pytest.raises(InputError):
            RandomVariable("X", (0, 1), {"a": 2})


class TestCondition:
    def test_uniform_on_event(self):
        space = SampleSpace.uniform(range(4))
        ident = space.identity("X")
        half = RandomVariable.from_function("E", space, lambda x: x < 2, (True, False))
        table = push_forward(space, [ident, half])
        cond = condition(table, {"E": True})
        assert cond.variables == ("X",)
        assert [cond.prob(x) for x in range(4)] == [0.5, 0.5, 0.0, 0.0]

    def test_full_assignment_is_point_mass(self):
        space = product_measure([coin(0.3), coin(0.6)])
        table = push_forward(space, space.projections(["X", "Y"]))
        cond = condition(table, {"X": "H", "Y": "T"})
        assert cond.variables == ()
        assert cond.prob() == pytest.approx(1.0)

    def test_product_condition_gives_marginal(self):
        space = product_measure([coin(0.3), coin(0.6)])
        table = push_forward(space, space.projections(["X", "Y"]))
        for v in ("H", "T"):
            cond = condition(table, {"X": v})
            assert cond.prob("H") == pytest.approx(0.6, abs=1e-15)

    def test_zero_probability_is_conditioning_error(self):
        space = SampleSpace.from_weights("ab", (1.0, 0.0))
        table = push_forward(space, [space.identity("X")])
        with pytest.raises(ConditioningError):
            condition(table, {"X": "b"})

    def test_conditioning_error_is_not_input_error(self):
        assert not issubclass(ConditioningError, InputError)

    def test_unknown_value_is_input_error(self):
        space = SampleSpace.uniform("ab")
        table = push_forward(space, [space.identity("X")])
        with pytest.raises(InputError):
            condition(table, {"X": "z"})


class TestIndependence:
    def test_product_projections(self):
        space = product_measure([coin(0.3), coin(0.6), coin(0.9)])
        rep = check_mutual_independence(space.projections(), space, 1e-12)
        assert rep.independent and rep.max_residual < 1e-15

    def test_identical_variables(self):
        space = product_measure([coin(0.5), coin(0.5)])
        x = space.projection(0, "A")
        z = RandomVariable("Z", x.codomain, x.assignment)
        rep = check_mutual_independence([x, z], space, 1e-12)
        assert not rep.independent
        assert rep.max_residual == pytest.approx(0.25)

    def test_xor_is_pairwise_but_not_jointly_independent(self):
        atoms = list(itertools.product((0, 1), repeat=3))
        weights = [0.25 if z == x ^ y else 0.0 for x, y, z in atoms]
        space = SampleSpace.from_weights(atoms, weights)
        bits = [RandomVariable.from_function(n, space, lambda a, k=k: a[k], (0, 1)) for k, n in enumerate("XYZ")]
        for pair in itertools.combinations(bits, 2):
            assert check_mutual_independence(list(pair), space, 1e-12).independent
        rep = check_mutual_independence(bits, space, 1e-12)
        assert not rep.independent
        # P(0,0,0) = 1/4 against 1/8 from the marginals
        assert rep.max_residual == pytest.approx(0.125)

    def test_tolerance_must_be_positive(self):
        space = coin()
        with pytest.raises(InputError):
            check_mutual_independence([space.identity()], space, 0.0)


class TestSampling:
    def test_empty(self):
        assert list(sample(coin(), seed=1, n=0)) == []

    def test_negative_n(self):
        with pytest.raises(InputError):
            sample(coin(), 1, -1)

    def test_point_mass(self):
        space = SampleSpace.from_weights("abc", (0.0, 1.0, 0.0))
        assert set(sample(space, seed=7, n=1000)) == {"b"}

    def test_reproducible(self):
        space = SampleSpace.from_weights("abc", (0.2, 0.3, 0.5))
        assert list(sample(space, 42, 5000)) == list(sample(space, 42, 5000))
        assert list(sample(space, 42, 5000)) != list(sample(space, 43, 5000))

    def test_stream_matches_chunked_indices(self):
        space = SampleSpace.from_weights("abc", (0.2, 0.3, 0.5))
        n = 200_000  # spans several internal chunks
        idx = sample_indices(space.dist.weights, make_rng(9), n)
        assert list(sample(space, 9, n)) == [space.atoms[i] for i in idx]

    def test_fair_coin_frequency(self):
        n = 10**6
        heads = sum(1 for x in sample(coin(), seed=2024, n=n) if x == "H")
        assert abs(heads / n - 0.5) <= 4 * math.sqrt(0.25 / n)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_sampling_law_per_atom(self, seed):
        weights = (0.05, 0.15, 0.3, 0.5)
        n = 10**6
        idx = sample_indices(weights, make_rng(seed), n)
        freq = np.bincount(idx, minlength=4) / n
        for p, f in zip(weights, freq):
            assert abs(f - p) <= 4 * math.sqrt(p * (1 - p) / n)


@settings(max_examples=50, deadline=None)
@given(weights_st, weights_st, weights_st)
def test_normalization_and_marginal_consistency(w1, w2, w3):
    spaces = [SampleSpace.from_weights(range(len(w)), w) for w in (w1, w2, w3)]
    space = product_measure(spaces)
    assert abs(math.fsum(space.dist) - 1) <= 1e-12
    rvs = space.projections(["X", "Y", "Z"])
    full = push_forward(space, rvs)
    for keep in (["X"], ["Y", "Z"], ["Z", "X"]):
        direct = push_forward(space, [rv for n in keep for rv in rvs if rv.name == n])
        assert full.marginal(keep).max_abs_diff(direct) <= 1e-12


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(0.0, 1.0), min_size=8, max_size=8).filter(lambda ws: sum(ws) > 0.1))
def test_condition_commutes_with_marginalizing(raw):
    # generic joint law of three bits
    ws = [w / math.fsum(raw) for w in raw]
    table = JointTable(("X", "Y", "Z"), ((0, 1),) * 3, dict(zip(itertools.product((0, 1), repeat=3), ws)))
    for v in (0, 1):
        try:
            a = condition(table, {"Z": v}).marginal(["X"])
            b = condition(table.marginal(["X", "Z"]), {"Z": v})
        except ConditioningError:
            continue
        assert a.max_abs_diff(b) <= 1e-12


def test_independence_residual_matches_brute_force():
    rng = np.random.default_rng(3)
    arr = rng.random((2, 3, 2))
    arr /= arr.sum()
    table = JointTable.from_array(("X", "Y", "Z"), ((0, 1), (0, 1, 2), (0, 1)), arr)
    px, py, pz = arr.sum(axis=(1, 2)), arr.sum(axis=(0, 2)), arr.sum(axis=(0, 1))
    brute = max(
        abs(arr[i, j, k] - px[i] * py[j] * pz[k])
        for i, j, k in itertools.product(range(2), range(3), range(2))
    )
    assert independence_residual(table) == pytest.approx(brute, abs=1e-15)


def test_counter_of_small_sample_is_stable():
    # pins the generator contract: Philox keyed by seed, inverse-CDF draws
    space = SampleSpace.from_weights("ab", (0.5, 0.5))
    first = list(sample(space, 0, 10))
    again = Counter(sample(space, 0, 10))
    assert Counter(first) == again
