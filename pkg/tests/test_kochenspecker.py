import itertools
import math
import time

import numpy as np
import pytest

from hvlab.errors import InputError
from hvlab.kochenspecker import (
    Coloring,
    RaySet,
    brute_force_colorings,
    coloring_model,
    frame_function_obstruction,
    orthogonality_graph,
    peres33,
    search_coloring,
    verify_coloring,
)
from hvlab.models import FactorizedModel, check_perfect_correlation
from hvlab.quantum import SPIN1_OUTCOMES, Frame, Ray

TRIAD = RaySet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1)])
TWO_TRIADS = RaySet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1), (0, 1, 1), (0, 1, -1)])


def recount(rays):
    """Independent pair/triad count by looping over all index triples."""
    v = [r.components for r in rays.rays]

    def orth(i, j):
        return abs(sum(a * b for a, b in zip(v[i], v[j]))) <= 1e-9

    n = len(v)
    pairs = sum(orth(i, j) for i, j in itertools.combinations(range(n), 2))
    triads = sum(
        orth(i, j) and orth(i, k) and orth(j, k) for i, j, k in itertools.combinations(range(n), 3)
    )
    return pairs, triads


def peres_oracle_vectors():
    """Generate-and-deduplicate by exact integer signatures (a, b, c) meaning a + b*sqrt(2)."""
    vals = [0, 1, -1, "r", "-r"]
    num = {0: 0.0, 1: 1.0, -1: -1.0, "r": math.sqrt(2), "-r": -math.sqrt(2)}
    keep = set()
    for v in itertools.product(vals, repeat=3):
        zeros = v.count(0)
        roots = sum(1 for x in v if x in ("r", "-r"))
        ok = (
            (zeros == 2 and roots == 0)
            or (zeros == 1 and roots <= 1)
            or (zeros == 0 and roots == 1)
        )
        if not ok:
            continue
        vec = np.array([num[x] for x in v])
        first = next(x for x in vec if x != 0)
        key = tuple(np.round(vec * np.sign(first), 12))
        keep.add(key)
    return keep


class TestRays:
    def test_duplicate_up_to_sign_rejected(self):
        with pytest.raises(InputError):
            RaySet.from_vectors([(1, 0, 0), (-1, 0, 0)])

    def test_dedupe(self):
        assert len(RaySet.from_vectors([(1, 0, 0), (-2, 0, 0)], dedupe=True)) == 1

    def test_index(self):
        assert TRIAD.index(Ray((0.0, -1.0, 0.0))) == 1
        assert TRIAD.index(Ray.from_vector((1, 1, 0))) is None


class TestGraph:
    def test_standard_basis(self):
        g = orthogonality_graph(TRIAD)
        assert len(g.pairs) == 3 and g.triads == ((0, 1, 2),)

    def test_two_rays(self):
        g = orthogonality_graph(RaySet.from_vectors([(1, 0, 0), (0, 1, 0)]))
        assert g.pairs == ((0, 1),) and g.triads == ()

    def test_triad_pairs_listed(self):
        g = orthogonality_graph(peres33())
        pairs = set(g.pairs)
        for i, j, k in g.triads:
            assert {(i, j), (i, k), (j, k)} <= pairs

    def test_peres_counts_match_recount(self):
        rays = peres33()
        g = orthogonality_graph(rays)
        assert (len(g.pairs), len(g.triads)) == recount(rays)
        # frozen from the recount oracle
        assert (len(g.pairs), len(g.triads)) == (72, 16)


class TestPeres:
    def test_size(self):
        assert len(peres33()) == 33

    def test_matches_generate_and_dedupe_oracle(self):
        oracle = peres_oracle_vectors()
        assert len(oracle) == 33
        got = set()
        for r in peres33().rays:
            c = np.array(r.components)
            # rescale so the smallest nonzero magnitude is 1 (recovers the integer-and-root form)
            scale = min(abs(x) for x in c if abs(x) > 1e-9)
            got.add(tuple(np.round(c / scale, 12)))
        assert got == oracle

    def test_contains_standard_basis(self):
        rays = peres33()
        for e in np.eye(3):
            assert rays.index(Ray(tuple(e))) is not None

    def test_canonical_unit_rays(self):
        for r in peres33().rays:
            assert abs(np.linalg.norm(r.components) - 1) <= 1e-12
            first = next(c for c in r.components if abs(c) > 1e-9)
            assert first > 0


class TestVerify:
    g = orthogonality_graph(TRIAD)

    def test_one_zero(self):
        assert verify_coloring(self.g, Coloring((1, 0, 1))).valid

    def test_two_zeros(self):
        rep = verify_coloring(self.g, Coloring((0, 0, 1)))
        assert not rep.valid and rep.violation == ("triad", (0, 1, 2))

    def test_orthogonal_pair_outside_triad(self):
        g = orthogonality_graph(RaySet.from_vectors([(1, 0, 0), (0, 1, 0)]))
        rep = verify_coloring(g, Coloring((0, 0)))
        assert not rep.valid and rep.violation == ("pair", (0, 1))

    def test_length(self):
        with pytest.raises(InputError):
            verify_coloring(self.g, Coloring((1, 0)))

    def test_outcome_is_spin_triple(self):
        g = orthogonality_graph(TWO_TRIADS)
        for c in brute_force_colorings(g):
            for t in g.triads:
                assert c.outcome(t) in SPIN1_OUTCOMES


class TestSearch:
    def test_single_triad_three(self):
        g = orthogonality_graph(TRIAD)
        rep = search_coloring(g, count=True)
        assert rep.colorable and rep.count == 3 == len(brute_force_colorings(g))

    def test_two_triads_five(self):
        g = orthogonality_graph(TWO_TRIADS)
        assert len(g.triads) == 2
        rep = search_coloring(g, count=True)
        assert rep.count == 5 == len(brute_force_colorings(g))

    def test_witness_verifies(self):
        rep = search_coloring(orthogonality_graph(TWO_TRIADS))
        assert rep.colorable and not rep.exhausted
        assert verify_coloring(orthogonality_graph(TWO_TRIADS), rep.witness).valid

    def test_peres_uncolorable(self):
        start = time.perf_counter()
        rep = search_coloring(orthogonality_graph(peres33()))
        assert time.perf_counter() - start < 10
        assert not rep.colorable and rep.exhausted and rep.witness is None
        assert rep.nodes_explored > 0

    def test_node_count_is_deterministic(self):
        g = orthogonality_graph(peres33())
        assert search_coloring(g).nodes_explored == search_coloring(g).nodes_explored

    def test_empty_set(self):
        rep = search_coloring(orthogonality_graph(RaySet(())), count=True)
        assert rep.colorable and rep.count == 1

    def test_agrees_with_brute_force_on_small_sets(self):
        rng = np.random.default_rng(30)
        pool = peres33().rays
        for _ in range(150):
            n = int(rng.integers(1, 13))
            idx = rng.choice(len(pool), size=n, replace=False)
            g = orthogonality_graph(RaySet(tuple(pool[i] for i in sorted(idx))))
            brute = brute_force_colorings(g)
            counted = search_coloring(g, count=True)
            first = search_coloring(g)
            assert counted.count == len(brute)
            assert first.colorable == bool(brute)

    def test_sign_invariance(self):
        rays = peres33()
        base_g = orthogonality_graph(rays)
        base = search_coloring(base_g)
        for i in (0, 5, 17, 32):
            flipped = rays.negated(i)
            g = orthogonality_graph(flipped)
            assert g.pairs == base_g.pairs and g.triads == base_g.triads
            assert search_coloring(g) == base

    def test_sign_invariance_with_raw_negative_vectors(self):
        vecs = [(1, 0, 0), (0, 1, 1), (0, 1, -1)]
        a = orthogonality_graph(RaySet.from_vectors(vecs))
        b = orthogonality_graph(RaySet.from_vectors([tuple(-x for x in v) for v in vecs]))
        assert (a.pairs, a.triads) == (b.pairs, b.triads)
        assert search_coloring(a, count=True) == search_coloring(b, count=True)

    def test_monotonicity(self):
        rng = np.random.default_rng(31)
        base = list(peres33().rays)
        for _ in range(5):
            extra = [Ray.from_vector(v) for v in rng.normal(size=(3, 3))]
            g = orthogonality_graph(RaySet(tuple(base + extra)))
            assert not search_coloring(g).colorable

    def test_monotonicity_small_sets(self):
        rng = np.random.default_rng(32)
        pool = peres33().rays
        for _ in range(100):
            idx = sorted(rng.choice(len(pool), size=12, replace=False))
            sub = sorted(rng.choice(idx, size=8, replace=False))
            small = search_coloring(orthogonality_graph(RaySet(tuple(pool[i] for i in sub))))
            big = search_coloring(orthogonality_graph(RaySet(tuple(pool[i] for i in idx))))
            if not small.colorable:
                assert not big.colorable


class TestObstruction:
    def test_triad_model_exists(self):
        rep = frame_function_obstruction(TRIAD)
        assert rep.model_exists and rep.status == "model exists"
        assert verify_coloring(orthogonality_graph(TRIAD), rep.colorings[0]).valid

    def test_peres_no_model(self):
        rep = frame_function_obstruction(peres33())
        assert not rep.model_exists and rep.status == "no model exists"
        assert rep.search.exhausted

    def test_round_trip_from_colorings(self):
        g = orthogonality_graph(TWO_TRIADS)
        colorings = brute_force_colorings(g)
        m = coloring_model(g, colorings)
        assert check_perfect_correlation(m).holds
        rep = frame_function_obstruction(TWO_TRIADS, m)
        assert rep.model_exists and rep.status == "model consistent"
        assert list(rep.colorings) == colorings

    def test_perfect_correlation_failure(self):
        g = orthogonality_graph(TRIAD)
        f = g.triad_frame(g.triads[0])
        m = FactorizedModel("spin1", (f,), (f,), (0,), ((SPIN1_OUTCOMES[0],),), ((SPIN1_OUTCOMES[1],),))
        rep = frame_function_obstruction(TRIAD, m)
        assert not rep.model_exists and rep.status == "perfect correlation fails"

    def test_contextual_model_is_not_a_frame_function(self):
        g = orthogonality_graph(TWO_TRIADS)
        fa, fb = g.frames()
        # Alice gives shared ray 0 value 0 in one frame and 1 in the other; Bob's
        # frame shares no ray with hers, so perfect correlation is vacuous
        bob = Frame(tuple(Ray.from_vector(v) for v in ((1, 1, 1), (1, -1, 0), (1, 1, -2))))
        m = FactorizedModel(
            "spin1", (fa, fb), (bob,), (0,),
            ((SPIN1_OUTCOMES[0],), (SPIN1_OUTCOMES[1],)), ((SPIN1_OUTCOMES[0],),),
        )
        assert check_perfect_correlation(m).checked == 0
        rep = frame_function_obstruction(TWO_TRIADS, m)
        assert not rep.model_exists and rep.status == "not a frame function"
        assert rep.failure == {"check": "frame function", "z": 0, "ray": 0}

    def test_pair_rule_violation(self):
        # two frames with no common ray; e1 in the first is orthogonal to b in the second
        b, c, d = (0, 1, 1), (1, 1, -1), (-2, 1, -1)
        rays = RaySet.from_vectors([(1, 0, 0), (0, 1, 0), (0, 0, 1), b, c, d])
        g = orthogonality_graph(rays)
        assert len(g.triads) == 2 and (0, 3) in g.pairs
        fa, fb = g.frames()
        resp = ((SPIN1_OUTCOMES[0],), (SPIN1_OUTCOMES[fb.position(rays[3])],))
        m = FactorizedModel("spin1", (fa, fb), (fa, fb), ("z",), resp, resp)
        rep = frame_function_obstruction(rays, m)
        assert rep.status == "not a coloring"
        assert rep.failure == {"check": "pair", "z": "z", "rays": [0, 3]}

    def test_uncovered_settings(self):
        std = Frame.from_rows([1, 0, 0, 0, 1, 0, 0, 0, 1])
        one = ((SPIN1_OUTCOMES[0],),)
        m = FactorizedModel("spin1", (std,), (std,), (0,), one, one)
        with pytest.raises(InputError):
            frame_function_obstruction(TWO_TRIADS, m)

    def test_photon_model_rejected(self):
        m = FactorizedModel("photon", (0.0,), (0.0,), (0,), ((0,),), ((0,),))
        with pytest.raises(InputError):
            frame_function_obstruction(TRIAD, m)
