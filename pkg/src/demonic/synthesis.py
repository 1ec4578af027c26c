"""Bounded enumeration of basic-operation compositions.

Every basic operation changes ``w`` only by a state-dependent integer offset,
so a statement is summarised by a :class:`TauMap`: for each of the 12 base
configurations ``(X, A, I)``, a distribution over ``(X', A', I', dw)``.
Composition of statements is composition of these maps, which makes an
exhaustive breadth-first search over op sequences cheap.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Iterator, NamedTuple

from .oplib import BASIC_OPS, PistonParams, basic_op
from .semantics import run
from .syntax import (Assign, If, Prob, Ref, Seq, Statement, WLiteral)
from .thermo import HALF, ONE, PARTICLE_PROBS, BoxState, Dist, merge


class AbstractionError(ValueError):
    """Statement assigns an absolute work value; no offset summary exists."""


class BaseState(NamedTuple):
    X: Fraction
    A: bool
    I: bool  # noqa: E741

    def with_w(self, w: int) -> BoxState:
        return BoxState(self.X, self.A, self.I, w)

    def __str__(self):
        return f"({self.X}, {'T' if self.A else 'F'}, {'T' if self.I else 'F'})"


BASE_STATES: tuple[BaseState, ...] = tuple(
    BaseState(x, a, i) for x in PARTICLE_PROBS for a in (False, True) for i in (False, True)
)
BASE_INDEX = {b: k for k, b in enumerate(BASE_STATES)}
UNKNOWN_BIT = BaseState(HALF, False, False)

Row = tuple  # tuple[tuple[tuple[int, int], Fraction], ...]  ((base index, dw), p)


@dataclass(frozen=True)
class TauMap:
    rows: tuple[Row, ...]
    _hash: int = field(default=0, compare=False, repr=False)

    def __post_init__(self):
        if len(self.rows) != len(BASE_STATES):
            raise ValueError("a TauMap has one row per base state")
        object.__setattr__(self, "_hash", hash(self.rows))

    def __hash__(self):
        return self._hash

    def row(self, b: BaseState) -> Row:
        return self.rows[BASE_INDEX[b]]

    def apply(self, s: BoxState) -> Dist:
        return merge((BASE_STATES[k].with_w(s.w + dw), p)
                     for (k, dw), p in self.rows[BASE_INDEX[BaseState(*s.base)]])

    def apply_dist(self, d: Dist) -> Dist:
        out = []
        for s, p in d.items():
            out.extend((t, p * q) for t, q in self.apply(s).items())
        return merge(out)

    def expected_dw(self, b: BaseState) -> Fraction:
        return sum((p * dw for (_, dw), p in self.row(b)), Fraction(0))

    def then(self, other: "TauMap") -> "TauMap":
        return compose(self, other)

    def as_dict(self) -> dict:
        return {str(b): [{"p": str(p), "base": str(BASE_STATES[k]), "dw": dw}
                         for (k, dw), p in row]
                for b, row in zip(BASE_STATES, self.rows)}


def _canon_row(acc: dict) -> Row:
    return tuple(sorted((k, p) for k, p in acc.items() if p))


def identity() -> TauMap:
    return TauMap(tuple((((k, 0), ONE),) for k in range(len(BASE_STATES))))


def check_offset_only(stmt: Statement) -> None:
    if isinstance(stmt, Assign):
        if stmt.field == "w" and isinstance(stmt.value, WLiteral):
            raise AbstractionError("absolute assignment to s.w has no offset summary")
    elif isinstance(stmt, Seq):
        check_offset_only(stmt.first)
        check_offset_only(stmt.second)
    elif isinstance(stmt, Prob):
        check_offset_only(stmt.left)
        check_offset_only(stmt.right)
    elif isinstance(stmt, If):
        check_offset_only(stmt.then)
        check_offset_only(stmt.orelse)
    elif isinstance(stmt, Ref):
        raise ValueError(f"unexpanded reference {stmt.name!r}")


def abstract_tau(stmt: Statement) -> TauMap:
    """Summarise ``stmt`` by running it on every base state with ``w = 0``."""
    check_offset_only(stmt)
    rows = []
    for b in BASE_STATES:
        acc: dict = {}
        for s, p in run(stmt, b.with_w(0)).items():
            key = (BASE_INDEX[BaseState(*s.base)], s.w)
            acc[key] = acc.get(key, 0) + p
        rows.append(_canon_row(acc))
    return TauMap(tuple(rows))


def compose(f: TauMap, g: TauMap) -> TauMap:
    """``f`` then ``g``: push each output of ``f`` through ``g``, adding offsets."""
    rows = []
    for row in f.rows:
        acc: dict = {}
        for (k, dw), p in row:
            for (k2, dw2), q in g.rows[k]:
                key = (k2, dw + dw2)
                acc[key] = acc.get(key, 0) + p * q
        rows.append(_canon_row(acc))
    return TauMap(tuple(rows))


@lru_cache(maxsize=None)
def op_maps(w_c: int = 1, ops: tuple[str, ...] = BASIC_OPS) -> dict[str, TauMap]:
    params = PistonParams(w_c)
    return {name: abstract_tau(basic_op(name, params)) for name in ops}


def compose_names(names, w_c: int = 1) -> TauMap:
    maps = op_maps(w_c)
    out = identity()
    for n in names:
        out = compose(out, maps[n])
    return out


@dataclass(frozen=True)
class Enumeration:
    """All distinct maps reachable within ``depth`` steps, first witness each.

    ``levels[k]`` holds the maps first reached at depth ``k``; ``closed`` is
    true when some level added nothing new (the reachable set is complete).
    """
    levels: tuple[tuple[tuple[TauMap, tuple[str, ...]], ...], ...]
    closed: bool

    def __iter__(self) -> Iterator[tuple[TauMap, tuple[str, ...]]]:
        for level in self.levels:
            yield from level

    @property
    def size(self) -> int:
        return sum(len(level) for level in self.levels)


@lru_cache(maxsize=8)
def enumerate_maps(max_depth: int, w_c: int = 1, ops: tuple[str, ...] = BASIC_OPS) -> Enumeration:
    """Breadth-first closure of ``ops`` under composition, memoised by map.

    Ops are tried in lexicographic name order, so the witness kept for each
    map is the shortest one and, among those, the first in that order.
    """
    maps = op_maps(w_c, ops)
    order = sorted(ops)
    start = identity()
    seen = {start}
    levels = [((start, ()),)]
    closed = False
    for _ in range(max_depth):
        new = []
        for m, witness in levels[-1]:
            for name in order:
                n = compose(m, maps[name])
                if n not in seen:
                    seen.add(n)
                    new.append((n, witness + (name,)))
        if not new:
            closed = True
            break
        levels.append(tuple(new))
    return Enumeration(tuple(levels), closed)


@dataclass(frozen=True)
class SearchResult:
    found: bool
    witness: tuple[str, ...] | None
    depth_searched: int
    maps_explored: int
    closed: bool
    best_rows_matched: int = 0
    best_partial: tuple[str, ...] | None = None

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "witness": list(self.witness) if self.witness is not None else None,
            "depth_searched": self.depth_searched,
            "maps_explored": self.maps_explored,
            "closed": self.closed,
            "near_miss": {"rows_matched": self.best_rows_matched,
                          "of": len(BASE_STATES),
                          "witness": list(self.best_partial) if self.best_partial is not None else None},
        }


def search_for(target: TauMap, max_depth: int = 6, w_c: int = 1) -> SearchResult:
    """Look for a composition of basic ops whose summary equals ``target``.

    The empty composition counts (depth 0).  Reports the closest miss, by
    number of base-state rows that agree with the target.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    en = enumerate_maps(max_depth, w_c)
    best, best_w = -1, None
    for m, witness in en:
        if m == target:
            return SearchResult(True, witness, len(en.levels) - 1, en.size, en.closed,
                                len(BASE_STATES), witness)
        agree = sum(a == b for a, b in zip(m.rows, target.rows))
        if agree > best:
            best, best_w = agree, witness
    return SearchResult(False, None, len(en.levels) - 1, en.size, en.closed, best, best_w)


@dataclass(frozen=True)
class CostResult:
    found: bool
    cost: Fraction | None
    witness: tuple[str, ...] | None
    depth_searched: int
    maps_explored: int
    closed: bool
    final: Dist | None = None

    def as_dict(self) -> dict:
        return {
            "found": self.found,
            "cost": str(self.cost) if self.cost is not None else None,
            "witness": list(self.witness) if self.witness is not None else None,
            "depth_searched": self.depth_searched,
            "maps_explored": self.maps_explored,
            "closed": self.closed,
            "final": str(self.final) if self.final is not None else None,
        }


def _localized(row: Row, target_x) -> bool:
    return all(BASE_STATES[k].X == target_x for (k, _), _ in row)


def min_erasure_cost(max_depth: int = 6, target_X=0, *, strict: bool = False,
                     w_c: int = 1) -> CostResult:
    """Cheapest composition sending the unknown bit ``(1/2, F, F)`` to a
    definite X on every branch.

    ``cost`` is minus the largest expected ``dw``.  With ``strict`` every base
    state must end at ``target_X``, not only the unknown bit.
    """
    if max_depth < 1:
        raise ValueError("max_depth must be >= 1")
    target_X = Fraction(target_X)
    if target_X not in (0, 1):
        raise ValueError("target_X must be 0 or 1")
    en = enumerate_maps(max_depth, w_c)
    best = None
    for m, witness in en:
        ok = (all(_localized(r, target_X) for r in m.rows) if strict
              else _localized(m.row(UNKNOWN_BIT), target_X))
        if not ok:
            continue
        gain = m.expected_dw(UNKNOWN_BIT)
        if best is None or gain > best[0]:
            best = (gain, witness, m)
    depth = len(en.levels) - 1
    if best is None:
        return CostResult(False, None, None, depth, en.size, en.closed)
    gain, witness, m = best
    return CostResult(True, -gain, witness, depth, en.size, en.closed,
                      m.apply(UNKNOWN_BIT.with_w(0)))


def min_reset_cost(d0: Dist, max_depth: int = 6, target_X=None, *, w_c: int = 1) -> CostResult:
    """Cheapest composition taking ``d0`` to a single definite X on all branches.

    ``cost`` is ``<w>`` before minus the best ``<w>`` after.  ``target_X`` of
    ``None`` accepts either 0 or 1.
    """
    targets = (Fraction(0), Fraction(1)) if target_X is None else (Fraction(target_X),)
    en = enumerate_maps(max_depth, w_c)
    best = None
    for m, witness in en:
        out = m.apply_dist(d0)
        xs = {s.X for s in out}
        if len(xs) != 1 or next(iter(xs)) not in targets:
            continue
        if best is None or out.mean_w > best[0]:
            best = (out.mean_w, witness, out)
    depth = len(en.levels) - 1
    if best is None:
        return CostResult(False, None, None, depth, en.size, en.closed)
    mean, witness, out = best
    return CostResult(True, d0.mean_w - mean, witness, depth, en.size, en.closed, out)


def erasure_signature(m: TauMap, b: BaseState = UNKNOWN_BIT) -> tuple:
    """X-marginal and expected dw on one input: what an erasure cares about."""
    marg: dict = {}
    for (k, _), p in m.row(b):
        x = BASE_STATES[k].X
        marg[x] = marg.get(x, 0) + p
    return (tuple(sorted(marg.items())), m.expected_dw(b))
