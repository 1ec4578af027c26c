"""Small-step probabilistic semantics and exact evaluation.

``step`` implements the seven transition rules (assign, comp1, comp2, if1,
if2, prob1, prob2).  ``run`` unfolds them to the terminal distribution,
``tau_lift`` is the Kleisli extension to distributions and ``trace`` keeps the
whole derivation tree.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Mapping, NamedTuple

from .syntax import (Assign, If, Prob, Ref, Seq, Skip, Statement, WOffset,
                     eval_bexp, fold_names, pretty_stmt)
from .thermo import HALF, ONE, BoxState, Dist, merge, point


@dataclass(frozen=True)
class Config:
    stmt: Statement
    state: BoxState

    @property
    def final(self) -> bool:
        return isinstance(self.stmt, Skip)


class Transition(NamedTuple):
    p: Fraction
    target: Config
    rule: str


StepSet = tuple  # tuple[Transition, ...]


def update(s: BoxState, a: Assign) -> BoxState:
    """``s[x -> a]``."""
    if a.field == "w":
        v = a.value
        return s.replace(w=s.w + v.offset if isinstance(v, WOffset) else v.value)
    return s.replace(**{a.field: a.value})


def step(c: Config) -> StepSet:
    """All one-step transitions out of ``c``; empty iff ``c`` is final."""
    S, s = c.stmt, c.state
    if isinstance(S, Skip):
        return ()
    if isinstance(S, Assign):
        return (Transition(ONE, Config(Skip(), update(s, S)), "assign"),)
    if isinstance(S, Seq):
        if isinstance(S.first, Skip):
            return (Transition(ONE, Config(S.second, s), "comp2"),)
        return tuple(
            Transition(t.p, Config(Seq(t.target.stmt, S.second), t.target.state), "comp1")
            for t in step(Config(S.first, s))
        )
    if isinstance(S, If):
        if eval_bexp(S.cond, s):
            return (Transition(ONE, Config(S.then, s), "if1"),)
        return (Transition(ONE, Config(S.orelse, s), "if2"),)
    if isinstance(S, Prob):
        return (Transition(HALF, Config(S.left, s), "prob1"),
                Transition(HALF, Config(S.right, s), "prob2"))
    if isinstance(S, Ref):
        raise ValueError(f"unexpanded reference {S.name!r}; call expand() first")
    raise TypeError(f"not a statement: {S!r}")


def run(S: Statement, s: BoxState) -> Dist:
    """Terminal distribution of ``<S, s>`` (exact; equal configurations merged)."""
    frontier: dict[Config, Fraction] = {Config(S, s): ONE}
    finals: list[tuple[BoxState, Fraction]] = []
    while frontier:
        nxt: dict[Config, Fraction] = {}
        for c, p in frontier.items():
            if c.final:
                finals.append((c.state, p))
                continue
            for t in step(c):
                nxt[t.target] = nxt.get(t.target, 0) + p * t.p
        frontier = nxt
    return merge(finals)


def tau_lift(S: Statement, d: Dist) -> Dist:
    """Kleisli extension: ``sum_s d(s) * run(S, s)``."""
    out: list[tuple[BoxState, Fraction]] = []
    for s, p in d.items():
        out.extend((t, p * q) for t, q in run(S, s).items())
    return merge(out)


def run_dist(S: Statement, d: Dist | BoxState) -> Dist:
    return tau_lift(S, d if isinstance(d, Dist) else point(d))


# -- derivation trees -------------------------------------------------------

@dataclass(frozen=True)
class TraceTree:
    """Derivation tree.  ``rule`` names the transition rule that produced
    this node from its parent (``None`` at the root)."""

    root: Config
    rule: str | None = None
    children: tuple[tuple[Fraction, "TraceTree"], ...] = field(default=())

    def leaves(self, p: Fraction = ONE) -> Iterator[tuple[Fraction, BoxState]]:
        if not self.children:
            yield p, self.root.state
        for q, child in self.children:
            yield from child.leaves(p * q)

    def paths(self, p: Fraction = ONE, prefix: tuple = ()) -> Iterator[tuple[Fraction, tuple]]:
        """Every root-to-leaf path as ``(probability, (Config, ...))``."""
        here = prefix + (self.root,)
        if not self.children:
            yield p, here
        for q, child in self.children:
            yield from child.paths(p * q, here)

    def nodes(self) -> Iterator["TraceTree"]:
        yield self
        for _, child in self.children:
            yield from child.nodes()

    def final_dist(self) -> Dist:
        return merge((s, p) for p, s in self.leaves())

    def to_json(self, names: Mapping[str, Statement] | None = None) -> dict:
        node = {
            "stmt": _show(self.root.stmt, names),
            "state": str(self.root.state),
            "children": [{"p": str(p), "node": c.to_json(names)} for p, c in self.children],
        }
        if self.rule:
            node["rule"] = self.rule
        return node

    def to_dot(self, names: Mapping[str, Statement] | None = None) -> str:
        lines = ["digraph trace {", '  node [shape=box, fontname="monospace"];']
        counter = iter(range(1 << 30))

        def visit(t: TraceTree) -> str:
            nid = f"n{next(counter)}"
            label = f"<{_show(t.root.stmt, names)}, {t.root.state}>"
            lines.append(f"  {nid} [label={json.dumps(label)}];")
            for p, child in t.children:
                cid = visit(child)
                lines.append(f"  {nid} -> {cid} [label={json.dumps(f'{child.rule} {p}')}];")
            return nid

        visit(self)
        lines.append("}")
        return "\n".join(lines) + "\n"

    def render(self, names: Mapping[str, Statement] | None = None, indent: int = 0) -> str:
        pad = "  " * indent
        out = [f"{pad}<{_show(self.root.stmt, names)}, {self.root.state}>"]
        for p, child in self.children:
            out.append(f"{pad}  ={child.rule} {p}=>")
            out.append(child.render(names, indent + 1))
        return "\n".join(out)


def _show(stmt: Statement, names) -> str:
    return pretty_stmt(fold_names(stmt, names) if names else stmt)


def trace(S: Statement, s: BoxState) -> TraceTree:
    return _trace(Config(S, s), None)


def _trace(c: Config, rule: str | None) -> TraceTree:
    return TraceTree(c, rule, tuple((t.p, _trace(t.target, t.rule)) for t in step(c)))


def checkpoints(tree: TraceTree, stmts) -> list[tuple[Fraction, list[Config]]]:
    """Project each derivation path onto the configurations whose statement is
    in ``stmts`` (plus the leaf).  Reproduces op-granularity derivation chains.
    """
    wanted = set(stmts)
    out = []
    for p, path in tree.paths():
        keep = [c for c in path if c.stmt in wanted or c is path[-1]]
        dedup = [c for i, c in enumerate(keep) if i == 0 or keep[i - 1] != c]
        out.append((p, dedup))
    return out
