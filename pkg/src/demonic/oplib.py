"""The basic Szilard-box operations as DEMONIC statements.

Six basic operations (partition and piston insertion/removal), the Cycle used
to fix the piston failure cost, the two-piston Shift and its mirror, and the
contested free reset NReset.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction
from importlib import resources

from .semantics import run
from .syntax import (And, Assign, BExp, FieldA, FieldI, If, Not, Or, Prob,
                     Program, Ref, Seq, Skip, Statement, WOffset, XEquals,
                     expand, parse, seq)
from .thermo import HALF, ONE, ZERO, BoxState

BASIC_OPS = ("PartIn", "PartOut", "LPistIn", "RPistIn", "LPistOut", "RPistOut")
OP_NAMES = BASIC_OPS + ("Cycle", "Shift", "ShiftMirror", "NReset")

CYCLE = ("PartIn", "LPistIn", "PartOut", "LPistOut")
SHIFT = ("RPistIn", "PartOut", "RPistOut", "LPistIn", "PartIn", "LPistOut")
SHIFT_MIRROR = ("LPistIn", "PartOut", "LPistOut", "RPistIn", "PartIn", "RPistOut")


class SearchExhausted(RuntimeError):
    pass


@dataclass(frozen=True)
class PistonParams:
    w_c: int = 1

    def __post_init__(self):
        if int(self.w_c) != self.w_c or self.w_c < 0:
            raise ValueError(f"w_c must be a non-negative integer (got {self.w_c})")


def _a(field, value):
    if field == "w":
        value = WOffset(value)
    elif field == "X":
        value = Fraction(value)
    return Assign(field, value)


def _x(v) -> BExp:
    return XEquals(Fraction(v))


def part_in() -> Statement:
    return _a("A", True)


def part_out() -> Statement:
    return If(FieldA(),
              If(Not(FieldI()),
                 seq(_a("X", HALF), _a("A", False)),
                 _a("A", False)),
              Skip())


def pist_out(side: Fraction) -> Statement:
    """Remove a piston; ``side`` is the X value it must hold (0 for left)."""
    return If(Or(Not(FieldI()), Not(_x(side))),
              Skip(),
              If(FieldA(),
                 _a("I", False),
                 seq(_a("I", False), _a("X", HALF), _a("w", 1))))


def pist_in(near: Fraction, w_c: int) -> Statement:
    """Insert a piston pushing the particle towards X = ``near`` (0 for left)."""
    far = 1 - near
    return If(_x(far),
              _a("w", -w_c),
              If(_x(near),
                 _a("I", True),
                 If(Not(FieldA()),
                    seq(_a("X", near), _a("w", -1), _a("I", True)),
                    Prob(seq(_a("X", near), _a("I", True)),
                         seq(_a("X", far), _a("w", -w_c))))))


def nreset() -> Statement:
    to_left = seq(_a("X", ONE), _a("A", True))
    return If(_x(0), to_left,
              If(_x(1), Skip(),
                 If(_x(HALF), to_left, Skip())))


def nreset_reduced() -> Statement:
    return seq(_a("X", ONE), _a("A", True))


def compose_ops(names, params: PistonParams | None = None) -> Statement:
    return seq(*(basic_op(n, params) for n in names))


def basic_op(name: str, params: PistonParams | None = None) -> Statement:
    """Macro-free AST for a named operation."""
    w_c = (params or PistonParams()).w_c
    if name == "PartIn":
        return part_in()
    if name == "PartOut":
        return part_out()
    if name == "LPistIn":
        return pist_in(ZERO, w_c)
    if name == "RPistIn":
        return pist_in(ONE, w_c)
    if name == "LPistOut":
        return pist_out(ZERO)
    if name == "RPistOut":
        return pist_out(ONE)
    if name == "Cycle":
        return compose_ops(CYCLE, params)
    if name == "Shift":
        return compose_ops(SHIFT, params)
    if name == "ShiftMirror":
        return compose_ops(SHIFT_MIRROR, params)
    if name == "NReset":
        return nreset()
    raise KeyError(f"unknown operation {name!r}")


def mirror(stmt: Statement) -> Statement:
    """Left-right dual: exchange X = 0 and X = 1 in guards and assignments."""
    if isinstance(stmt, Assign):
        if stmt.field == "X":
            return Assign("X", 1 - stmt.value)
        return stmt
    if isinstance(stmt, Seq):
        return Seq(mirror(stmt.first), mirror(stmt.second))
    if isinstance(stmt, Prob):
        return Prob(mirror(stmt.left), mirror(stmt.right))
    if isinstance(stmt, If):
        return If(_mirror_b(stmt.cond), mirror(stmt.then), mirror(stmt.orelse))
    return stmt


def _mirror_b(b: BExp) -> BExp:
    if isinstance(b, XEquals):
        return XEquals(1 - b.value)
    if isinstance(b, Not):
        return Not(_mirror_b(b.arg))
    if isinstance(b, (Or, And)):
        return type(b)(_mirror_b(b.left), _mirror_b(b.right))
    return b


def prelude_program(params: PistonParams | None = None) -> Program:
    """All ten named definitions, composites written as references."""
    defs = [(n, basic_op(n, params)) for n in BASIC_OPS]
    defs += [("Cycle", seq(*map(Ref, CYCLE))),
             ("Shift", seq(*map(Ref, SHIFT))),
             ("ShiftMirror", seq(*map(Ref, SHIFT_MIRROR))),
             ("NReset", nreset())]
    return Program(tuple(defs), None)


def prelude_env(params: PistonParams | None = None, path: str | None = None) -> dict[str, Statement]:
    """Expanded prelude definitions keyed by name.

    ``path`` (or the ``DEMONIC_PRELUDE`` environment variable) selects a
    prelude file; otherwise the definitions are built for ``params``.
    """
    path = path or os.environ.get("DEMONIC_PRELUDE")
    prog = parse(open(path, encoding="utf-8").read()) if path else prelude_program(params)
    env: dict[str, Statement] = {}
    for name, body in prog.definitions:
        env[name] = expand(Program((), body), env)
    return env


def prelude_text() -> str:
    return resources.files("demonic").joinpath("prelude.dem").read_text(encoding="utf-8")


def cycle_expected_work(w_c: int, w0: int = 0) -> Fraction:
    """``<w>`` after Cycle on (1/2, F, F, w0), by exact execution."""
    d = run(basic_op("Cycle", PistonParams(w_c)), BoxState(HALF, False, False, w0))
    return d.mean_w


def cycle_work_formula(w_c: int, w0: int = 0) -> Fraction:
    return w0 + Fraction(1 - w_c, 2)


def derive_wc(max_candidate: int = 5) -> tuple[int, list[tuple[int, Fraction]]]:
    """Smallest failure cost keeping Cycle from extracting work on average.

    Returns ``(w_c, table)`` where ``table`` lists ``(candidate, <w>)`` for the
    candidates examined.
    """
    if max_candidate < 0:
        raise ValueError("max_candidate must be >= 0")
    table = []
    for w_c in range(max_candidate + 1):
        mean = cycle_expected_work(w_c)
        table.append((w_c, mean))
        if mean <= 0:
            return w_c, table
    raise SearchExhausted(f"no w_c <= {max_candidate} keeps <w> <= 0")
