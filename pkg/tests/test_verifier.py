from fractions import Fraction

import pytest

from demonic.oplib import BASIC_OPS, prelude_env
from demonic.semantics import tau_lift
from demonic.syntax import Skip, expand, parse, parse_statement
from demonic.synthesis import BASE_STATES
from demonic.thermo import EPS, HALF, BoxState, Dist, phi, point
from demonic.verifier import (MAX_DENOM_LOG2, MAX_SUPPORT, W_RANGE, Corpus,
                              InvariantVerdict, audit_kelvin, check_all_basic,
                              check_invariance, check_points, classify,
                              coherent, compositions, kelvin_sweep, ledger,
                              random_rows, row_to_dist, verdict)

ENV = prelude_env()
POST_MEASUREMENT = Dist.parse("{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}")


def S(text):
    return BoxState.parse(text)


class TestVerdict:
    def test_nreset_counterexample(self):
        v = verdict(ENV["NReset"], point(S("(1/2, F, F, 1)")))
        assert v.holds_before and not v.holds_after
        assert v.phi_before == 0.0 and v.phi_after == 1.0
        assert v.counterexample == point(S("(1/2, F, F, 1)"))
        assert v.after == point(S("(1, T, F, 1)"))

    def test_mixed_counterexample_for_piston(self):
        d = Dist.parse("{1/64: (1/2, F, F, 2), 63/64: (0, F, F, 0)}")
        v = verdict(ENV["LPistIn"], d)
        assert v.phi_before < 0
        assert v.phi_after == pytest.approx(1 / 64)
        assert v.counterexample == d

    def test_holds(self):
        v = verdict(ENV["Cycle"], point(S("(1/2, F, F, 1)")))
        assert v.holds_after and v.counterexample is None

    def test_consistency_enforced(self):
        with pytest.raises(ValueError):
            InvariantVerdict(True, False, 0.0, 1.0, None)


class TestCorpus:
    def test_reproducible(self):
        assert random_rows(200, 3) == random_rows(200, 3)
        assert random_rows(200, 3) != random_rows(200, 4)

    def test_family(self):
        for row in random_rows(2000, 0):
            assert 1 <= len(row) <= MAX_SUPPORT
            assert sum(p for _, _, p in row) == 1
            assert len({(k, w) for k, w, _ in row}) == len(row)
            for k, w, p in row:
                assert w in W_RANGE and 0 <= k < 12
                assert (p * (1 << MAX_DENOM_LOG2)).denominator == 1

    def test_kernel_matches_exact(self):
        corpus = Corpus.random(300, 9)
        for i, row in enumerate(corpus.rows):
            assert corpus.phi0[i] == pytest.approx(phi(row_to_dist(row)).phi, abs=1e-12)

    def test_points(self):
        assert len(Corpus.points()) == 12 * 9
        assert len(Corpus.points(coherent_only=True)) == 10 * 9
        assert [str(b) for b in BASE_STATES if not coherent(b)] == [
            "(1/2, F, T)", "(1/2, T, T)"]


class TestInvariance:
    @pytest.mark.parametrize("name", BASIC_OPS)
    def test_basic_ops_on_points(self, name):
        assert check_points(ENV[name]).violations == 0

    def test_skip(self):
        assert check_invariance(Skip(), 2000, 0).ok

    @pytest.mark.parametrize("name", ["PartOut", "LPistIn", "RPistIn", "LPistOut", "RPistOut"])
    def test_basic_ops_break_on_mixtures(self, name):
        rep = check_invariance(ENV[name], 20_000, 0)
        assert rep.violations > 0
        for v in rep.examples:
            assert v.phi_before <= EPS < v.phi_after

    def test_partin_never_breaks(self):
        assert check_invariance(ENV["PartIn"], 20_000, 0).ok

    def test_cycle_breaks_only_at_incoherent_points(self):
        rep = check_points(ENV["Cycle"])
        assert rep.violations == 2
        assert {str(v.counterexample) for v in rep.examples} == {
            "{1: (1/2, F, T, 1)}", "{1: (1/2, T, T, 1)}"}
        assert check_points(ENV["Cycle"], coherent_only=True).ok

    def test_nreset_breaks_on_coherent_points(self):
        assert not check_points(ENV["NReset"], coherent_only=True).ok

    def test_extra_distributions_included(self):
        extra = [Dist.parse("{1/64: (1/2, F, F, 2), 63/64: (0, F, F, 0)}")]
        rep = check_invariance(ENV["LPistIn"], 0, 0, extra=extra)
        assert rep.trials == 1 and rep.violations == 1

    def test_exact_route_for_absolute_work(self):
        stmt = parse_statement("s.w := 5")
        rep = check_invariance(stmt, 500, 0)
        assert rep.violations == rep.kept > 0

    def test_suite_small(self):
        a = check_all_basic(2000, 1)
        b = check_all_basic(2000, 1)
        assert a.as_dict() == b.as_dict()
        assert len(a.random) == sum(1 for _ in compositions(3)) + 3 == 261
        assert a.violations == a.point_violations + a.random_violations > 0
        assert a.point_violations == 8

    def test_compositions(self):
        assert sum(1 for _ in compositions(2)) == 6 + 36


class TestKelvin:
    def test_nreset_cycle(self):
        S0 = S("(1/2, F, F, 1)")
        stmt = parse("NReset ; RPistIn ; PartOut ; RPistOut", env=ENV)
        a = audit_kelvin(expand(stmt, ENV), S0)
        assert a.is_cycle and a.mean_w_final == 2 and a.violation

    def test_skip(self):
        a = audit_kelvin(Skip(), S("(0, T, F, 3)"))
        assert a.is_cycle and not a.violation

    def test_cycle_is_fair(self):
        a = audit_kelvin(ENV["Cycle"], S("(1/2, F, F, 0)"))
        assert a.is_cycle and a.mean_w_final == 0 and not a.violation

    def test_partial_return_not_flagged(self):
        stmt = parse_statement("[skip] (+) [s.A := true ; s.w := w + 3]")
        a = audit_kelvin(stmt, S("(1/2, F, F, 0)"))
        assert a.returned_mass == HALF
        assert a.mean_w_final == Fraction(3, 2)
        assert not a.is_cycle and not a.violation

    def test_sweep(self):
        sw = kelvin_sweep(4)
        assert sw.violations == ()
        assert sw.cycles_found > 0

    def test_sweep_depth_six(self):
        sw = kelvin_sweep(6)
        assert sw.maps_checked == 5746 and sw.violations == ()


class TestClassify:
    def test_measurement(self):
        c = classify(ENV["LPistIn"], S("(1/2, T, F, 0)"))
        assert c.kind == "measurement"
        assert c.work_delta == Fraction(-1, 2)
        assert (c.branch_entropy_before, c.branch_entropy_after) == (1.0, 0.0)
        assert c.ensemble_entropy_before == pytest.approx(1.0, abs=EPS)
        assert c.ensemble_entropy_after == pytest.approx(1.0, abs=EPS)

    def test_reset_towards_measured_side(self):
        c = classify(ENV["Shift"], POST_MEASUREMENT)
        assert c.kind == "reset" and c.work_delta == Fraction(-1, 2)

    def test_reset_towards_far_side(self):
        # the branch already at X = 1 pays the failure cost, then one compression
        c = classify(ENV["ShiftMirror"], POST_MEASUREMENT)
        assert c.kind == "reset" and c.work_delta == -1
        assert c.ensemble_entropy_after == 0.0

    def test_erasure(self):
        c = classify(ENV["Shift"], S("(1/2, F, F, 0)"))
        assert c.kind == "erasure" and c.work_delta == -1

    def test_other(self):
        c = classify(Skip(), S("(1/2, F, F, 0)"))
        assert c.kind == "other" and c.work_delta == 0
        assert c.branch_entropy_before == c.branch_entropy_after


class TestLedger:
    def test_cycle_from_baseline(self):
        entries = ledger(parse("Cycle", env=ENV).main, S("(1/2, F, F, 1)"), ENV)
        assert len(entries) == 2
        entries = ledger(parse("PartIn ; LPistIn ; PartOut ; LPistOut").main,
                         S("(1/2, F, F, 1)"), ENV)
        assert [e.label for e in entries] == ["(start)", "PartIn", "LPistIn", "PartOut", "LPistOut"]
        assert all(e.report.phi <= EPS for e in entries)
        assert entries[-1].dist == tau_lift(ENV["Cycle"], point(S("(1/2, F, F, 1)")))

    def test_nreset_flagged(self):
        entries = ledger(parse("NReset ; RPistIn").main, S("(1/2, F, F, 1)"), ENV)
        assert [e.flagged for e in entries] == [False, True, True]
