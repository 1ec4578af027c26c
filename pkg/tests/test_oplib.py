from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from demonic.oplib import (BASIC_OPS, OP_NAMES, PistonParams, SearchExhausted,
                           basic_op, cycle_expected_work, cycle_work_formula,
                           derive_wc, mirror, nreset, nreset_reduced,
                           prelude_env, prelude_text)
from demonic.semantics import run, tau_lift
from demonic.synthesis import BASE_STATES
from demonic.thermo import BoxState, Dist, point

ENV = prelude_env()


def S(text):
    return BoxState.parse(text)


def D(text):
    return Dist.parse(text)


@pytest.mark.parametrize("op,start,expected", [
    ("PartIn", "(1/2, F, F, 0)", "(1/2, T, F, 0)"),
    ("PartOut", "(0, T, F, 3)", "(1/2, F, F, 3)"),
    ("PartOut", "(0, T, T, 3)", "(0, F, T, 3)"),
    ("PartOut", "(1, F, F, 3)", "(1, F, F, 3)"),
    ("LPistIn", "(1/2, F, F, 0)", "(0, F, T, -1)"),
    ("LPistIn", "(0, T, F, 0)", "(0, T, T, 0)"),
    ("LPistIn", "(1, F, F, 0)", "(1, F, F, -1)"),
    ("RPistIn", "(1/2, F, F, 0)", "(1, F, T, -1)"),
    ("LPistOut", "(0, F, T, 0)", "(1/2, F, F, 1)"),
    ("LPistOut", "(0, T, T, 0)", "(0, T, F, 0)"),
    ("LPistOut", "(1, F, T, 0)", "(1, F, T, 0)"),
    ("LPistOut", "(0, F, F, 0)", "(0, F, F, 0)"),
    ("RPistOut", "(1, F, T, 0)", "(1/2, F, F, 1)"),
])
def test_deterministic_cases(op, start, expected):
    assert run(ENV[op], S(start)) == point(S(expected))


def test_piston_against_partition():
    assert run(ENV["LPistIn"], S("(1/2, T, F, 0)")) == D("{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}")
    assert run(ENV["RPistIn"], S("(1/2, T, F, 0)")) == D("{1/2: (1, T, T, 0), 1/2: (0, T, F, -1)}")


@pytest.mark.parametrize("w_c", [0, 1, 2, 5])
def test_failure_cost_parameter(w_c):
    op = basic_op("LPistIn", PistonParams(w_c))
    assert run(op, S("(1, T, F, 0)")) == point(S(f"(1, T, F, {-w_c})"))


def test_params_validated():
    with pytest.raises(ValueError):
        PistonParams(-1)
    with pytest.raises(KeyError):
        basic_op("Teleport")


@pytest.mark.parametrize("name", OP_NAMES)
def test_total_on_every_base_state(name):
    for b in BASE_STATES:
        out = run(ENV[name], b.with_w(0))
        assert sum(out.values()) == 1


class TestDuality:
    def test_pairs(self):
        assert mirror(ENV["LPistIn"]) == ENV["RPistIn"]
        assert mirror(ENV["LPistOut"]) == ENV["RPistOut"]
        assert mirror(ENV["PartIn"]) == ENV["PartIn"]
        assert mirror(ENV["PartOut"]) == ENV["PartOut"]
        assert mirror(ENV["Shift"]) == ENV["ShiftMirror"]

    @pytest.mark.parametrize("name", OP_NAMES)
    def test_involution(self, name):
        assert mirror(mirror(ENV[name])) == ENV[name]

    @pytest.mark.parametrize("name", BASIC_OPS)
    def test_semantic_mirror(self, name):
        flip = lambda s: s.replace(X=1 - s.X)  # noqa: E731
        for b in BASE_STATES:
            s = b.with_w(1)
            got = run(mirror(ENV[name]), flip(s))
            want = {flip(t): p for t, p in run(ENV[name], s).items()}
            assert dict(got.items()) == want


class TestShift:
    def test_moves_left_to_right_for_free(self):
        assert run(ENV["Shift"], S("(1, F, F, 0)")) == point(S("(0, T, F, 0)"))
        assert run(ENV["ShiftMirror"], S("(0, F, F, 0)")) == point(S("(1, T, F, 0)"))

    def test_erases_unknown_bit_at_unit_cost(self):
        assert run(ENV["Shift"], S("(1/2, F, F, 0)")) == point(S("(0, T, F, -1)"))
        assert run(ENV["ShiftMirror"], S("(1/2, F, F, 0)")) == point(S("(1, T, F, -1)"))

    def test_on_post_measurement(self):
        d = D("{1/2: (0, T, T, 0), 1/2: (1, T, F, -1)}")
        out = tau_lift(ENV["Shift"], d)
        assert {s.X for s in out} == {0}


class TestCycleWork:
    @pytest.mark.parametrize("w_c,expected", [(0, Fraction(1, 2)), (1, 0), (2, Fraction(-1, 2))])
    def test_values(self, w_c, expected):
        assert cycle_expected_work(w_c) == expected

    @given(st.integers(0, 6), st.integers(-4, 4))
    def test_formula(self, w_c, w0):
        assert cycle_expected_work(w_c, w0) == cycle_work_formula(w_c, w0)

    def test_derive(self):
        w_c, table = derive_wc()
        assert w_c == 1
        assert table == [(0, Fraction(1, 2)), (1, 0)]

    def test_derive_exhausted(self):
        with pytest.raises(SearchExhausted):
            derive_wc(0)
        with pytest.raises(ValueError):
            derive_wc(-1)


class TestNReset:
    def test_counterexample_point(self):
        assert run(nreset(), S("(1/2, F, F, 1)")) == point(S("(1, T, F, 1)"))

    def test_reduced_form_differs_on_two_states(self):
        # the full form leaves A alone when X = 1; the reduced form sets it
        differ = [b for b in BASE_STATES
                  if run(nreset(), b.with_w(0)) != run(nreset_reduced(), b.with_w(0))]
        assert [str(b) for b in differ] == ["(1, F, F)", "(1, F, T)"]

    def test_reduced_form_agrees_when_partition_in(self):
        for b in BASE_STATES:
            if b.A or b.X != 1:
                assert run(nreset(), b.with_w(2)) == run(nreset_reduced(), b.with_w(2))


class TestPreludeOverride:
    def test_env_var(self, tmp_path, monkeypatch):
        path = tmp_path / "p.dem"
        path.write_text(prelude_text().replace("PartIn = s.A := true", "PartIn = s.A := false"))
        monkeypatch.setenv("DEMONIC_PRELUDE", str(path))
        env = prelude_env()
        assert run(env["PartIn"], S("(0, T, F, 0)")) == point(S("(0, F, F, 0)"))
        assert run(env["Cycle"], S("(1/2, F, F, 0)")) != run(ENV["Cycle"], S("(1/2, F, F, 0)"))

    def test_default_matches_file(self, tmp_path):
        path = tmp_path / "p.dem"
        path.write_text(prelude_text())
        assert prelude_env(path=str(path)) == ENV
