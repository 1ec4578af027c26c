"""Invariant checking, Kelvin audits and measurement/reset/erasure classification.

The invariant predicate is ``phi(d) <= 0`` with
``phi = <w> - (<h(X)> + h(<X>)) / 2``.  Statements are checked semantically:
exhaustively over point distributions, and on a seeded corpus of random mixed
distributions evaluated in bulk by :mod:`demonic.kernels`.
"""
from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import kernels
from .oplib import BASIC_OPS, PistonParams, basic_op, compose_ops
from .semantics import run, tau_lift
from .syntax import Statement, expand, flatten_seq, fold_names, pretty_stmt
from .synthesis import (BASE_INDEX, BASE_STATES, AbstractionError, BaseState,
                        TauMap, abstract_tau, compose_names, enumerate_maps)
from .thermo import EPS, BoxState, Dist, PhiReport, fmt_frac, merge, phi, point

W_RANGE = range(-4, 5)
MAX_SUPPORT = 6
MAX_DENOM_LOG2 = 6  # denominators up to 64


@dataclass(frozen=True)
class InvariantVerdict:
    holds_before: bool
    holds_after: bool
    phi_before: float
    phi_after: float
    counterexample: Dist | None = None
    after: Dist | None = None

    def __post_init__(self):
        violated = self.holds_before and not self.holds_after
        if violated != (self.counterexample is not None):
            raise ValueError("counterexample must be present exactly for violations")

    def as_dict(self) -> dict:
        return {
            "holds_before": self.holds_before,
            "holds_after": self.holds_after,
            "phi_before": self.phi_before,
            "phi_after": self.phi_after,
            "counterexample": str(self.counterexample) if self.counterexample else None,
            "after": str(self.after) if self.after else None,
        }


def verdict(S: Statement, d: Dist) -> InvariantVerdict:
    """Exact single-distribution check."""
    before, out = phi(d), tau_lift(S, d)
    after = phi(out)
    bad = before.holds and not after.holds
    return InvariantVerdict(before.holds, after.holds, before.phi, after.phi,
                            d if bad else None, out if bad else None)


@dataclass(frozen=True)
class InvarianceReport:
    statement: str
    trials: int
    kept: int
    violations: int
    max_phi_after: float | None
    examples: tuple[InvariantVerdict, ...] = ()

    @property
    def ok(self) -> bool:
        return self.violations == 0

    def as_dict(self) -> dict:
        return {
            "statement": self.statement,
            "trials": self.trials,
            "kept": self.kept,
            "violations": self.violations,
            "max_phi_after": self.max_phi_after,
            "examples": [v.as_dict() for v in self.examples],
        }


# -- corpus -----------------------------------------------------------------

Row = list  # list of (base index, w, Fraction)


def random_rows(trials: int, seed: int) -> list[Row]:
    """Seeded random distributions: support 1..6 distinct states over the 12
    base states x ``W_RANGE``, dyadic weights with denominator <= 64."""
    rng = random.Random(seed)
    states = [(k, w) for k in range(len(BASE_STATES)) for w in W_RANGE]
    rows = []
    for _ in range(trials):
        n = rng.randint(1, MAX_SUPPORT)
        support = rng.sample(states, n)
        m = rng.randint((n - 1).bit_length(), MAX_DENOM_LOG2)
        denom = 1 << m
        cuts = sorted(rng.sample(range(1, denom), n - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
        rows.append([(k, w, Fraction(c, denom)) for (k, w), c in zip(support, parts)])
    return rows


def coherent(b: BaseState) -> bool:
    """False for ``(1/2, _, T)``: a piston is in, yet the particle is unlocalized.

    No basic operation produces such a state from one without it.
    """
    return not (b.X == Fraction(1, 2) and b.I)


def point_rows(w_range: Iterable[int] = W_RANGE, coherent_only: bool = False) -> list[Row]:
    return [[(k, w, Fraction(1))] for k, b in enumerate(BASE_STATES)
            if coherent(b) or not coherent_only for w in w_range]


def dist_to_row(d: Dist) -> Row:
    return [(BASE_INDEX[BaseState(*s.base)], s.w, p) for s, p in d.items()]


def row_to_dist(row: Row) -> Dist:
    return merge((BASE_STATES[k].with_w(w), p) for k, w, p in row)


@dataclass
class Corpus:
    rows: list
    packed: kernels.Corpus = field(init=False)
    phi0: np.ndarray = field(init=False)

    def __post_init__(self):
        self.packed = kernels.Corpus.from_rows(self.rows)
        self.phi0 = kernels.phi_before(self.packed)

    @classmethod
    def random(cls, trials: int, seed: int, extra: Sequence[Dist] = ()) -> "Corpus":
        return cls([dist_to_row(d) for d in extra] + random_rows(trials, seed))

    @classmethod
    def points(cls, coherent_only: bool = False) -> "Corpus":
        return cls(point_rows(coherent_only=coherent_only))

    def __len__(self):
        return len(self.rows)

    def kept_mask(self, eps: float = EPS) -> np.ndarray:
        return self.phi0 <= eps


def _check_on(S: Statement, tau: TauMap | None, corpus: Corpus, label: str,
              eps: float, max_examples: int) -> InvarianceReport:
    keep = corpus.kept_mask(eps)
    kept = int(keep.sum())
    if tau is not None:
        after = kernels.phi_after(corpus.packed, kernels.PackedTau.from_rows(tau.rows))
    else:
        after = np.array([phi(tau_lift(S, row_to_dist(r))).phi for r in corpus.rows])
    bad = np.flatnonzero(keep & (after > eps))
    examples = []
    for i in bad[:max_examples]:
        # confirm on the exact route
        v = verdict(S, row_to_dist(corpus.rows[i]))
        if v.counterexample is not None:
            examples.append(v)
    max_after = float(after[keep].max()) if kept else None
    return InvarianceReport(label, len(corpus), kept, int(len(bad)), max_after, tuple(examples))


def _tau_or_none(S: Statement) -> TauMap | None:
    try:
        return abstract_tau(S)
    except AbstractionError:
        return None


def check_invariance(S: Statement, trials: int = 10_000, seed: int = 0, *,
                     extra: Sequence[Dist] = (), eps: float = EPS,
                     label: str | None = None, max_examples: int = 5) -> InvarianceReport:
    """Fuzz ``S`` on seeded random distributions satisfying the invariant.

    Counts the sampled distributions with ``phi <= eps`` whose image under
    ``S`` has ``phi > eps``.  ``extra`` distributions are always included.
    """
    if trials < 1 and not extra:
        raise ValueError("trials must be >= 1")
    corpus = Corpus.random(max(trials, 0), seed, extra)
    return _check_on(S, _tau_or_none(S), corpus, label or pretty_stmt(S), eps, max_examples)


def check_points(S: Statement, *, eps: float = EPS, label: str | None = None,
                 max_examples: int = 5, coherent_only: bool = False) -> InvarianceReport:
    """Exhaustive check over point distributions: 12 base states x w in [-4, 4].

    ``coherent_only`` drops the two ``(1/2, _, T)`` base states.
    """
    return _check_on(S, _tau_or_none(S), Corpus.points(coherent_only), label or pretty_stmt(S),
                     eps, max_examples)


def compositions(max_length: int, ops: Sequence[str] = BASIC_OPS):
    for n in range(1, max_length + 1):
        yield from itertools.product(ops, repeat=n)


@dataclass(frozen=True)
class SuiteReport:
    trials: int
    seed: int
    random: tuple[InvarianceReport, ...]
    points: tuple[InvarianceReport, ...]

    @property
    def violations(self) -> int:
        return sum(r.violations for r in self.random + self.points)

    @property
    def point_violations(self) -> int:
        return sum(r.violations for r in self.points)

    @property
    def random_violations(self) -> int:
        return sum(r.violations for r in self.random)

    def failing(self) -> list[InvarianceReport]:
        return [r for r in self.random + self.points if not r.ok]

    def as_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "statements": len(self.random),
            "violations": self.violations,
            "point_violations": self.point_violations,
            "random_violations": self.random_violations,
            "failing": [{"statement": r.statement, "violations": r.violations,
                         "kept": r.kept, "max_phi_after": r.max_phi_after,
                         "example": r.examples[0].as_dict() if r.examples else None}
                        for r in self.failing()],
        }


def check_all_basic(trials: int = 10_000, seed: int = 0, *, max_length: int = 3,
                    named: Sequence[str] = ("Cycle", "Shift", "ShiftMirror"),
                    w_c: int = 1, eps: float = EPS, max_examples: int = 1) -> SuiteReport:
    """Invariant check for every composition of the basic ops up to
    ``max_length`` (plus the ``named`` composites), sharing one corpus."""
    corpus = Corpus.random(trials, seed)
    pts = Corpus.points()
    params = PistonParams(w_c)
    rand_reports, point_reports = [], []
    jobs = [(" ; ".join(names), names) for names in compositions(max_length)]
    jobs += [(name, None) for name in named]
    for label, names in jobs:
        if names is not None:
            tau = compose_names(names, w_c)
            S = None
        else:
            S = basic_op(label, params)
            tau = abstract_tau(S)
        stmt = S if S is not None else compose_ops(names, params)
        rand_reports.append(_check_on(stmt, tau, corpus, label, eps, max_examples))
        point_reports.append(_check_on(stmt, tau, pts, label, eps, max_examples))
    return SuiteReport(trials, seed, tuple(rand_reports), tuple(point_reports))


# -- Kelvin statement -------------------------------------------------------

@dataclass(frozen=True)
class KelvinAudit:
    initial: BoxState
    returned_mass: Fraction
    is_cycle: bool
    mean_w_final: Fraction
    violation: bool
    final: Dist | None = None

    def as_dict(self) -> dict:
        return {
            "initial": str(self.initial),
            "returned_mass": fmt_frac(self.returned_mass),
            "is_cycle": self.is_cycle,
            "mean_w_final": fmt_frac(self.mean_w_final),
            "violation": self.violation,
            "final": str(self.final) if self.final is not None else None,
        }


def audit_kelvin(S: Statement, s0: BoxState) -> KelvinAudit:
    """Does ``S`` return every branch to ``(X0, A0, I0)`` with ``<w> > w0``?"""
    out = run(S, s0)
    returned = sum((p for s, p in out.items() if s.base == s0.base), Fraction(0))
    is_cycle = returned == 1
    mean_w = out.mean_w
    return KelvinAudit(s0, returned, is_cycle, mean_w, is_cycle and mean_w > s0.w, out)


@dataclass(frozen=True)
class KelvinSweep:
    maps_checked: int
    cycles_found: int
    violations: tuple[tuple[tuple[str, ...], BaseState, Fraction], ...]
    depth: int
    closed: bool


def kelvin_sweep(max_depth: int = 6, w_c: int = 1) -> KelvinSweep:
    """Kelvin audit of every distinct composition up to ``max_depth``, from
    every base state (the summary is exact for all w0 at once)."""
    en = enumerate_maps(max_depth, w_c)
    cycles, bad = 0, []
    for m, witness in en:
        for k, b in enumerate(BASE_STATES):
            row = m.rows[k]
            if all(dst == k for (dst, _), _ in row):
                cycles += 1
                gain = m.expected_dw(b)
                if gain > 0:
                    bad.append((witness, b, gain))
    return KelvinSweep(en.size, cycles, tuple(bad), len(en.levels) - 1, en.closed)


# -- measurement / reset / erasure -------------------------------------------

@dataclass(frozen=True)
class OperationClass:
    kind: str
    branch_entropy_before: float
    branch_entropy_after: float
    ensemble_entropy_before: float
    ensemble_entropy_after: float
    work_delta: Fraction
    final: Dist | None = None

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "branch_entropy_before": self.branch_entropy_before,
            "branch_entropy_after": self.branch_entropy_after,
            "ensemble_entropy_before": self.ensemble_entropy_before,
            "ensemble_entropy_after": self.ensemble_entropy_after,
            "work_delta": fmt_frac(self.work_delta),
            "final": str(self.final) if self.final is not None else None,
        }


def entropy_kind(before: PhiReport, after: PhiReport, eps: float = EPS) -> str:
    """Entropic signature of a transition.

    measurement: <h(X)> goes from positive to 0, h(<X>) unchanged.
    reset: acts where <h(X)> = 0 and takes a positive h(<X>) to 0.
    erasure: both terms end at 0 starting from positive <h(X)> and h(<X>).
    """
    bb, ba = before.mean_branch_entropy, after.mean_branch_entropy
    eb, ea = before.ensemble_entropy, after.ensemble_entropy
    zero = lambda v: abs(v) <= eps  # noqa: E731
    if bb > eps and eb > eps and zero(ba) and zero(ea):
        return "erasure"
    if zero(bb) and eb > eps and zero(ea) and zero(ba):
        return "reset"
    if bb > eps and zero(ba) and abs(ea - eb) <= eps:
        return "measurement"
    return "other"


def classify(S: Statement, d0: Dist | BoxState) -> OperationClass:
    d0 = d0 if isinstance(d0, Dist) else point(d0)
    out = tau_lift(S, d0)
    before, after = phi(d0), phi(out)
    return OperationClass(entropy_kind(before, after),
                          before.mean_branch_entropy, after.mean_branch_entropy,
                          before.ensemble_entropy, after.ensemble_entropy,
                          after.mean_w - before.mean_w, out)


# -- stepwise ledger ----------------------------------------------------------

@dataclass(frozen=True)
class LedgerEntry:
    label: str
    report: PhiReport
    dist: Dist

    @property
    def flagged(self) -> bool:
        return not self.report.holds

    def as_dict(self) -> dict:
        return {"after": self.label, "dist": str(self.dist), "flagged": self.flagged,
                **self.report.as_dict()}


def ledger(S: Statement, d0: Dist | BoxState,
           env: Mapping[str, Statement] | None = None) -> list[LedgerEntry]:
    """Invariant quantities at every top-level sequencing boundary of ``S``.

    ``S`` may contain references into ``env``; a referenced op then counts as
    one step.  The first entry describes ``d0``.
    """
    d = d0 if isinstance(d0, Dist) else point(d0)
    entries = [LedgerEntry("(start)", phi(d), d)]
    for unit in flatten_seq(S):
        body = expand(unit, env) if env is not None else unit
        d = tau_lift(body, d)
        label = pretty_stmt(fold_names(unit, env) if env else unit)
        entries.append(LedgerEntry(label, phi(d), d))
    return entries
