"""Command-line front end: ``demonic <command> [options]``."""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .oplib import OP_NAMES, PistonParams, SearchExhausted, derive_wc, prelude_env
from .semantics import run_dist, trace
from .synthesis import (AbstractionError, abstract_tau, min_erasure_cost,
                        min_reset_cost, search_for)
from .syntax import (DemonicSyntaxError, Program, Ref, Statement, expand, parse,
                     pretty)
from .thermo import BoxState, Dist, DistError
from .verifier import (audit_kelvin, check_all_basic, check_invariance,
                       check_points, classify, ledger, verdict)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_VIOLATION = 2
EXIT_OPEN_SEARCH = 3
EXIT_IO = 4
EXIT_STATE = 5

EPILOG = """\
programs:
  --program takes a file path or prelude:<Name>, Name one of
  {names}.  A file's main statement is run; without one, its last definition.
  DEMONIC_PRELUDE overrides the built-in prelude with a file.

exit codes:
  0  success
  1  usage or parse error
  2  violation found (check, audit)
  3  search exhausted without reaching closure
  4  I/O error
  5  invalid state or distribution literal
""".format(names=", ".join(OP_NAMES))


class _Fail(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise _Fail(EXIT_USAGE, message)


def _dist_json(d: Dist) -> list[dict]:
    return [{"p": str(p), "state": str(s)} for s, p in d.items()]


class Loaded:
    """A program ready to run, with the names used to fold it for display."""

    def __init__(self, stmt: Statement, surface: Statement, env: dict, label: str):
        self.stmt = stmt
        self.surface = surface
        self.env = env
        self.label = label


def load_program(ref: str, w_c: int) -> Loaded:
    try:
        env = prelude_env(PistonParams(w_c))
    except OSError as e:
        raise _Fail(EXIT_IO, f"cannot read prelude: {e}") from e
    if ref.startswith("prelude:"):
        name = ref.split(":", 1)[1]
        if name not in env:
            raise _Fail(EXIT_USAGE, f"no prelude operation {name!r}")
        return Loaded(env[name], Ref(name), env, ref)
    try:
        with open(ref, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise _Fail(EXIT_IO, f"cannot read {ref}: {e.strerror or e}") from e
    prog = parse(text, env=env)
    main = prog.main
    if main is None:
        if not prog.definitions:
            raise _Fail(EXIT_USAGE, f"{ref}: empty program")
        main = Ref(prog.definitions[-1][0])
    names = dict(env)
    for name, body in prog.definitions:
        names[name] = expand(Program((), body), names)
    return Loaded(expand(Program(prog.definitions, main), env), main, names, ref)


def load_state(text: str | None, required: bool = True) -> Dist | None:
    if text is None:
        if required:
            raise _Fail(EXIT_USAGE, "--state is required for this command")
        return None
    try:
        return Dist.parse(text)
    except (ValueError, TypeError, DistError) as e:
        raise _Fail(EXIT_STATE, str(e)) from e


def _need_program(args) -> Loaded:
    if not args.program:
        raise _Fail(EXIT_USAGE, "--program is required for this command")
    return load_program(args.program, args.wc)


def _single_state(d: Dist) -> BoxState:
    if len(d) != 1:
        raise _Fail(EXIT_STATE, "this command needs a single state, not a distribution")
    return next(iter(d))


# -- commands -------------------------------------------------------------------

def cmd_parse(args):
    if args.program and args.program.startswith("prelude:"):
        prog = load_program(args.program, args.wc)
        text = pretty(prog.stmt)
    else:
        if not args.program:
            raise _Fail(EXIT_USAGE, "--program is required for this command")
        try:
            with open(args.program, encoding="utf-8") as fh:
                src = fh.read()
        except OSError as e:
            raise _Fail(EXIT_IO, f"cannot read {args.program}: {e.strerror or e}") from e
        text = pretty(parse(src))
    return EXIT_OK, {"program": text}, text


def cmd_run(args):
    prog = _need_program(args)
    d = load_state(args.state)
    out = run_dist(prog.stmt, d)
    return EXIT_OK, _dist_json(out), str(out)


def cmd_trace(args):
    prog = _need_program(args)
    s = _single_state(load_state(args.state))
    tree = trace(prog.stmt, s)
    names = prog.env
    if args.dot_out:
        try:
            with open(args.dot_out, "w", encoding="utf-8") as fh:
                fh.write(tree.to_dot(names))
        except OSError as e:
            raise _Fail(EXIT_IO, f"cannot write {args.dot_out}: {e.strerror or e}") from e
    return EXIT_OK, tree.to_json(names), tree.render(names)


def cmd_check(args):
    if not args.program:
        suite = check_all_basic(args.trials, args.seed, w_c=args.wc)
        rep = suite.as_dict()
        text = (f"{rep['statements']} statements, {args.trials} random trials (seed {args.seed}): "
                f"{rep['violations']} violations "
                f"({rep['point_violations']} point, {rep['random_violations']} random)")
        return (EXIT_VIOLATION if suite.violations else EXIT_OK), rep, text
    prog = _need_program(args)
    d = load_state(args.state, required=False)
    pts = check_points(prog.stmt, label=prog.label)
    rnd = check_invariance(prog.stmt, args.trials, args.seed, label=prog.label)
    rep = {"statement": prog.label, "points": pts.as_dict(), "random": rnd.as_dict()}
    bad = pts.violations + rnd.violations
    lines = [f"{prog.label}: {pts.violations} point violations of {pts.kept}, "
             f"{rnd.violations} random violations of {rnd.kept}"]
    if d is not None:
        v = verdict(prog.stmt, d)
        rep["verdict"] = v.as_dict()
        rep["ledger"] = [e.as_dict() for e in ledger(prog.surface, d, prog.env)]
        bad += v.counterexample is not None
        lines.append(f"from {d}: phi {v.phi_before:.6g} -> {v.phi_after:.6g}")
        for e in ledger(prog.surface, d, prog.env):
            mark = "  VIOLATED" if e.flagged else ""
            lines.append(f"  {e.label}: phi = {e.report.phi:.6g}{mark}")
    rep["violations"] = bad
    return (EXIT_VIOLATION if bad else EXIT_OK), rep, "\n".join(lines)


def cmd_audit(args):
    prog = _need_program(args)
    s = _single_state(load_state(args.state))
    a = audit_kelvin(prog.stmt, s)
    text = (f"is_cycle={a.is_cycle} returned_mass={a.returned_mass} "
            f"mean_w_final={a.mean_w_final} violation={a.violation}")
    return (EXIT_VIOLATION if a.violation else EXIT_OK), a.as_dict(), text


def cmd_classify(args):
    prog = _need_program(args)
    c = classify(prog.stmt, load_state(args.state))
    text = (f"{c.kind}: branch entropy {c.branch_entropy_before:.6g} -> "
            f"{c.branch_entropy_after:.6g}, ensemble entropy "
            f"{c.ensemble_entropy_before:.6g} -> {c.ensemble_entropy_after:.6g}, "
            f"work {c.work_delta}")
    return EXIT_OK, c.as_dict(), text


def cmd_search(args):
    if args.erasure_target is not None:
        r = min_erasure_cost(args.depth, args.erasure_target, strict=args.strict, w_c=args.wc)
        return _cost_out("erasure", r)
    if args.reset:
        r = min_reset_cost(load_state(args.state), args.depth, w_c=args.wc)
        return _cost_out("reset", r)
    prog = _need_program(args)
    try:
        target = abstract_tau(prog.stmt)
    except AbstractionError as e:
        raise _Fail(EXIT_USAGE, str(e)) from e
    r = search_for(target, args.depth, w_c=args.wc)
    rep = {"target": prog.label, **r.as_dict()}
    text = (f"{prog.label}: " + (f"found {' ; '.join(r.witness) or 'skip'}" if r.found
                                 else f"not found within depth {r.depth_searched}")
            + f" ({r.maps_explored} maps, closed={r.closed})")
    if not r.found:
        pts = check_points(prog.stmt, label=prog.label, max_examples=1)
        if pts.examples:
            v = pts.examples[0]
            rep["invariant_counterexample"] = v.as_dict()
            text += (f"\ninvariant broken from {v.counterexample}: "
                     f"phi {v.phi_before:.6g} -> {v.phi_after:.6g}")
    code = EXIT_OK if r.found or r.closed else EXIT_OPEN_SEARCH
    return code, rep, text


def _cost_out(kind, r):
    rep = {"kind": kind, **r.as_dict()}
    if r.found:
        text = f"{kind} cost {r.cost} via {' ; '.join(r.witness) or 'skip'}"
    else:
        text = f"no {kind} within depth {r.depth_searched}"
    code = EXIT_OK if r.found or r.closed else EXIT_OPEN_SEARCH
    return code, rep, text


def cmd_derive_wc(args):
    try:
        w_c, table = derive_wc(args.max_candidate)
    except SearchExhausted as e:
        return EXIT_OPEN_SEARCH, {"w_c": None, "error": str(e)}, str(e)
    rows = [{"w_c": c, "mean_w": str(m)} for c, m in table]
    text = "\n".join([str(w_c)] + [f"  w_c={c}: <w> = {m}" for c, m in table])
    return EXIT_OK, {"w_c": w_c, "table": rows}, text


COMMANDS = {
    "parse": cmd_parse, "run": cmd_run, "trace": cmd_trace, "check": cmd_check,
    "audit": cmd_audit, "classify": cmd_classify, "search": cmd_search,
    "derive-wc": cmd_derive_wc,
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="demonic", description="Szilard-box programs: run, trace, verify, search.",
                epilog=EPILOG, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--program", help="file path or prelude:<Name>")
    p.add_argument("--state", help='state "(1/2, F, F, 0)" or distribution "{1/2: (...), ...}"')
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=10_000)
    p.add_argument("--depth", type=int, default=6)
    p.add_argument("--wc", type=int, default=1, help="piston failure cost (default 1)")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("--dot-out", help="trace: also write a Graphviz file")
    p.add_argument("--erasure-target", type=Fraction, choices=(Fraction(0), Fraction(1)),
                   help="search: minimum-cost erasure of (1/2, F, F) to this X")
    p.add_argument("--strict", action="store_true",
                   help="search: erasure must localize every base state")
    p.add_argument("--reset", action="store_true",
                   help="search: minimum-cost reset of the --state distribution")
    p.add_argument("--max-candidate", type=int, default=5, help="derive-wc: largest w_c tried")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.wc < 0:
            raise _Fail(EXIT_USAGE, "--wc must be >= 0")
        if args.depth < 1:
            raise _Fail(EXIT_USAGE, "--depth must be >= 1")
        if args.trials < 1:
            raise _Fail(EXIT_USAGE, "--trials must be >= 1")
        code, report, text = COMMANDS[args.command](args)
    except _Fail as e:
        print(f"demonic: {e}", file=sys.stderr)
        return e.code
    except DemonicSyntaxError as e:
        print(f"demonic: parse error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:  # --help
        return EXIT_OK if e.code in (0, None) else EXIT_USAGE
    if args.format == "json":
        print(json.dumps(report, indent=2, ensure_ascii=False))
    else:
        print(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
