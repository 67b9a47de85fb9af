"""``charkit`` command-line front end.

Exit codes: 0 success / related, 1 parse or validation failure, 2 missing or
invalid annotation for the semantics, 3 unrelated, 4 formula and oracle
routes disagree (a toolkit bug), 5 fixed-point iteration left its chain
direction (corrupt declaration).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from charkit import oracle
from charkit.declgen import gen
from charkit.harness import DEFAULT_DENSITIES, difftest
from charkit.hml import (
    FormulaSyntaxError,
    HmlError,
    parse_declaration,
    parse_formula,
    satisfies,
    serialize_declaration,
)
from charkit.lts import LtsError, parse_lts
from charkit.semantics import MissingAnnotation, Semantics
from charkit.solver import ChainViolation, serialize_env, solve

EXIT_OK, EXIT_INPUT, EXIT_ANNOTATION, EXIT_UNRELATED, EXIT_DISAGREE, EXIT_CHAIN = range(6)


class CliError(Exception):
    def __init__(self, message, code):
        super().__init__(message)
        self.code = code


def _load_lts(args):
    try:
        text = Path(args.lts).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {args.lts}: {e.strerror}", EXIT_INPUT)
    try:
        return parse_lts(text, close=args.close_preorder)
    except LtsError as e:
        raise CliError(f"{args.lts}: {e}", EXIT_INPUT)


def _semantics(tag):
    try:
        return Semantics.parse(tag)
    except ValueError as e:
        raise CliError(str(e), EXIT_INPUT)


def _generate(sem, lts):
    try:
        return gen(sem, lts)
    except MissingAnnotation as e:
        raise CliError(str(e), EXIT_ANNOTATION)


def cmd_gen(args, out):
    lts = _load_lts(args)
    system = _generate(_semantics(args.semantics), lts)
    text = serialize_declaration(system.declaration, system.mode, header=system.header())
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        out.write(text)
    return EXIT_OK


def cmd_solve(args, out):
    lts = _load_lts(args)
    system = _generate(_semantics(args.semantics), lts)
    env, stats = solve(system.declaration, lts, args.mode)
    if args.show_env:
        out.write(serialize_env(env, lts, stats))
    out.write(oracle.serialize_relation(system.relation(env, lts), lts))
    return EXIT_OK


def _state(lts, name):
    try:
        return lts.state_id(name)
    except LtsError as e:
        raise CliError(str(e), EXIT_INPUT)


def cmd_check(args, out):
    lts = _load_lts(args)
    sem = _semantics(args.semantics)
    p, q = _state(lts, args.p), _state(lts, args.q)
    system = _generate(sem, lts)
    env, _ = solve(system.declaration, lts, "max")
    related = satisfies(lts, env, p, system.query(args.q))
    if args.oracle:
        expected = (p, q) in oracle.oracle_relation(sem, lts)
        if expected != related:
            out.write(
                f"internal disagreement on ({args.p}, {args.q}) under {sem.value}: "
                f"formula={related} oracle={expected}\n"
            )
            return EXIT_DISAGREE
    verdict = "related" if related else "unrelated"
    out.write(f"{verdict}: {args.p} {args.q} ({sem.value})\n")
    return EXIT_OK if related else EXIT_UNRELATED


def cmd_mc(args, out):
    lts = _load_lts(args)
    try:
        text = Path(args.decl).read_text(encoding="utf-8")
    except OSError as e:
        raise CliError(f"cannot read {args.decl}: {e.strerror}", EXIT_INPUT)
    try:
        decl, mode = parse_declaration(text)
        decl.check(lts, total=False)
        query = parse_formula(args.variable)
        p = lts.state_id(args.state)
        env, _ = solve(decl, lts, mode)
        holds = satisfies(lts, env, p, query)
    except ChainViolation as e:
        raise CliError(f"{args.decl}: {e}", EXIT_CHAIN)
    except (HmlError, FormulaSyntaxError, LtsError) as e:
        raise CliError(f"{args.decl}: {e}", EXIT_INPUT)
    verdict = "related" if holds else "unrelated"
    out.write(f"{verdict}: {args.state} |= {args.variable} ({mode})\n")
    return EXIT_OK if holds else EXIT_UNRELATED


def _csv(values, conv):
    out = []
    for v in values or ():
        out += [conv(x) for x in v.split(",") if x.strip()]
    return out


def cmd_difftest(args, out):
    sems = [_semantics(s) for s in _csv(args.semantics, str)] or list(Semantics)
    densities = _csv(args.density, float) or list(DEFAULT_DENSITIES)
    if args.trials < 1 or args.max_states < 1 or args.max_labels < 1:
        raise CliError("--trials, --max-states and --max-labels must be at least 1", EXIT_INPUT)
    report = difftest(
        sems,
        trials=args.trials,
        max_states=args.max_states,
        max_labels=args.max_labels,
        densities=densities,
        seed=args.seed,
        diverge_prob=args.diverge_prob,
        max_agents=args.max_agents,
    )
    out.write(report.to_json_lines() if args.json else report.to_text())
    return EXIT_OK if report.ok else EXIT_DISAGREE


def build_parser() -> argparse.ArgumentParser:
    tags = ", ".join(s.value for s in Semantics)
    parser = argparse.ArgumentParser(
        prog="charkit",
        description="Characteristic formulae for behavioural relations over finite LTSs.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def with_lts(p, semantics=True):
        p.add_argument("--lts", required=True, metavar="PATH", help="LTS text file")
        p.add_argument(
            "--close-preorder",
            action="store_true",
            help="replace the label preorder by its reflexive-transitive closure",
        )
        if semantics:
            p.add_argument("--semantics", required=True, metavar="TAG", help=f"one of {tags}")

    p = sub.add_parser("gen", help="emit the characteristic declaration")
    with_lts(p)
    p.add_argument("--out", metavar="PATH", help="write here instead of standard output")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("solve", help="solve the declaration and print the relation")
    with_lts(p)
    p.add_argument("--mode", choices=("max", "min"), default="max")
    p.add_argument("--show-env", action="store_true", help="also print the solved environment")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("check", help="decide whether p is related to q (exit 0 / 3)")
    with_lts(p)
    p.add_argument("--oracle", action="store_true", help="cross-check against the relational oracle")
    p.add_argument("p")
    p.add_argument("q")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("mc", help="model-check a state against a declaration file")
    with_lts(p, semantics=False)
    p.add_argument("--decl", required=True, metavar="PATH", help="declaration file")
    p.add_argument("state")
    p.add_argument("variable", help="formula to check, typically a variable such as 'X(q)'")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("difftest", help="random differential test of solver against oracle")
    p.add_argument("--semantics", action="append", metavar="TAGS", help="comma list; default all")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--max-states", type=int, default=8)
    p.add_argument("--max-labels", type=int, default=3)
    p.add_argument("--density", action="append", metavar="F", help="comma list; default 0.1,0.3,0.7")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--diverge-prob", type=float, default=0.3)
    p.add_argument("--max-agents", type=int, default=2)
    p.add_argument("--json", action="store_true", help="line-delimited JSON report")
    p.set_defaults(func=cmd_difftest)
    return parser


def main(argv=None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except CliError as e:
        err.write(f"charkit: {e}\n")
        return e.code


if __name__ == "__main__":
    sys.exit(main())
