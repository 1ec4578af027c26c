import random
from fractions import Fraction

import pytest
from hypothesis import given

from demonic import kernels
from demonic.oplib import BASIC_OPS, OP_NAMES, compose_ops, prelude_env
from demonic.semantics import run, tau_lift
from demonic.syntax import Assign, Skip, WLiteral, seq
from demonic.synthesis import (BASE_INDEX, BASE_STATES, AbstractionError,
                               BaseState, abstract_tau, compose, compose_names,
                               enumerate_maps, erasure_signature, identity,
                               min_erasure_cost, min_reset_cost, search_for)
from demonic.thermo import HALF, BoxState, Dist, point
from demonic.verifier import Corpus

from strategies import dists, statements

ENV = prelude_env()


def B(x, a, i):
    return BaseState(Fraction(x), a, i)


class TestAbstraction:
    def test_partin(self):
        m = abstract_tau(ENV["PartIn"])
        for b in BASE_STATES:
            assert m.row(b) == (((BASE_INDEX[B(b.X, True, b.I)], 0), 1),)

    def test_lpistin_probabilistic_clause(self):
        row = abstract_tau(ENV["LPistIn"]).row(B(HALF, True, False))
        assert dict(row) == {(BASE_INDEX[B(0, True, True)], 0): HALF,
                             (BASE_INDEX[B(1, True, False)], -1): HALF}

    def test_shift_row(self):
        row = abstract_tau(ENV["Shift"]).row(B(1, False, False))
        assert row == (((BASE_INDEX[B(0, True, False)], 0), 1),)

    def test_twelve_rows(self):
        assert len(BASE_STATES) == 12 == len(set(BASE_STATES))

    @pytest.mark.parametrize("name", OP_NAMES)
    @pytest.mark.parametrize("w0", [-2, 0, 3])
    def test_sound(self, name, w0):
        m = abstract_tau(ENV[name])
        for b in BASE_STATES:
            assert run(ENV[name], b.with_w(w0)) == m.apply(b.with_w(w0))

    @given(statements(absolute=False), dists())
    def test_sound_on_distributions(self, stmt, d):
        assert abstract_tau(stmt).apply_dist(d) == tau_lift(stmt, d)

    def test_absolute_work_rejected(self):
        with pytest.raises(AbstractionError):
            abstract_tau(seq(Skip(), Assign("w", WLiteral(0))))


class TestCompose:
    def test_identity(self):
        f = abstract_tau(ENV["LPistIn"])
        assert identity() == abstract_tau(Skip())
        assert compose(identity(), f) == f == compose(f, identity())

    def test_partition_in_then_out(self):
        m = compose(abstract_tau(ENV["PartIn"]), abstract_tau(ENV["PartOut"]))
        assert m.apply(BoxState(Fraction(0), False, False, 0)) == point(BoxState(HALF, False, False, 0))

    def test_homomorphism_random_pairs(self):
        rng = random.Random(11)
        for _ in range(100):
            a = [rng.choice(BASIC_OPS) for _ in range(rng.randint(1, 3))]
            b = [rng.choice(BASIC_OPS) for _ in range(rng.randint(1, 3))]
            s1, s2 = compose_ops(a), compose_ops(b)
            assert abstract_tau(seq(s1, s2)) == compose(abstract_tau(s1), abstract_tau(s2))

    @given(statements(absolute=False), statements(absolute=False))
    def test_homomorphism_generated(self, a, b):
        assert abstract_tau(seq(a, b)) == compose(abstract_tau(a), abstract_tau(b))

    def test_associative(self):
        f, g, h = (abstract_tau(ENV[n]) for n in ("LPistIn", "PartOut", "RPistOut"))
        assert compose(compose(f, g), h) == compose(f, compose(g, h))

    def test_names(self):
        assert compose_names(("PartIn", "LPistIn", "PartOut", "LPistOut")) == abstract_tau(ENV["Cycle"])


class TestSearch:
    def test_shift_found(self):
        target = abstract_tau(ENV["Shift"])
        r = search_for(target, 6)
        assert r.found and len(r.witness) <= 6
        assert compose_names(r.witness) == target

    def test_nreset_not_found(self):
        r = search_for(abstract_tau(ENV["NReset"]), 6)
        assert not r.found and r.witness is None
        assert r.depth_searched == 6
        assert r.best_rows_matched < 12
        d = r.as_dict()
        assert d["near_miss"]["of"] == 12

    def test_skip_found_at_depth_zero(self):
        r = search_for(abstract_tau(Skip()), 2)
        assert r.found and r.witness == ()

    def test_bad_depth(self):
        with pytest.raises(ValueError):
            search_for(identity(), 0)

    def test_enumeration_never_closes(self):
        # work offsets grow without bound, so every level adds new maps
        en = enumerate_maps(6)
        assert not en.closed
        assert all(len(level) > 0 for level in en.levels)
        assert en.size == 5746

    def test_witnesses_shortest_first(self):
        en = enumerate_maps(3)
        for k, level in enumerate(en.levels):
            assert all(len(w) == k for _, w in level)

    def test_reachable_maps_keep_invariant_on_coherent_points(self):
        corpus = Corpus.points(coherent_only=True)
        keep = corpus.kept_mask()
        for m, witness in enumerate_maps(6):
            after = kernels.phi_after(corpus.packed, kernels.PackedTau.from_rows(m.rows))
            assert not (keep & (after > 1e-9)).any(), witness


class TestErasure:
    def test_unit_cost_left(self):
        r = min_erasure_cost(6, 0)
        assert r.found and r.cost == 1
        assert r.witness == ("LPistIn",)

    def test_unit_cost_right(self):
        r = min_erasure_cost(6, 1)
        assert r.found and r.cost == 1
        assert r.witness == ("RPistIn",)

    def test_witness_equivalent_to_shift(self):
        r = min_erasure_cost(6, 0)
        got = erasure_signature(compose_names(r.witness))
        assert got == erasure_signature(abstract_tau(ENV["Shift"]))
        assert got == (((Fraction(0), 1),), -1)

    def test_one_op_suffices(self):
        # a lone piston insertion already localizes (1/2, F, F) at cost 1
        r = min_erasure_cost(2, 0)
        assert r.found and r.cost == 1
        assert min_erasure_cost(1, 0).cost == 1

    def test_monotone_in_depth(self):
        costs = [min_erasure_cost(d, 0).cost for d in range(1, 7)]
        assert all(a >= b for a, b in zip(costs, costs[1:]))

    def test_strict_mode(self):
        r = min_erasure_cost(6, 0, strict=True)
        assert r.found and r.cost >= 1
        m = compose_names(r.witness)
        assert all(BASE_STATES[k].X == 0 for row in m.rows for (k, _), _ in row)

    def test_bad_target(self):
        with pytest.raises(ValueError):
            min_erasure_cost(6, HALF)

    def test_reset_after_measurement(self):
        d = Dist.parse("{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}")
        r = min_reset_cost(d, 6)
        assert r.found and r.cost == HALF
        assert r.witness == ("PartOut", "LPistIn")
        assert {s.X for s in r.final} == {0}

    def test_reset_not_found(self):
        d = Dist.parse("{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}")
        assert not min_reset_cost(d, 1).found
