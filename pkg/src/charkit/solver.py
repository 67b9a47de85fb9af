"""Largest and least solutions of declarations by Kleene iteration.

Every round re-evaluates all equations against the previous environment.
The iteration direction is checked on every round: a non-descending round
in ``solve_max`` (non-ascending in ``solve_min``) raises
:class:`ChainViolation`, which cannot happen for a negation-free
declaration and therefore signals corrupted input or a bug.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass

from charkit.hml import (
    Declaration,
    HmlError,
    Var,
    apply_declaration,
    bottom_env,
    env_leq,
    evaluate,
    resolve_state,
    top_env,
    variables_of,
)
from charkit.lts import Lts, iter_bits


class ChainViolation(RuntimeError):
    pass


@dataclass(frozen=True)
class SolveStats:
    iterations: int
    lattice_bits: int


def _solve(d: Declaration, lts: Lts, greatest: bool):
    d.check(lts, total=False)
    env = top_env(d, lts) if greatest else bottom_env(d, lts)
    rounds = 0
    while True:
        nxt = apply_declaration(d, lts, env)
        rounds += 1
        ok = env_leq(nxt, env) if greatest else env_leq(env, nxt)
        if not ok:
            raise ChainViolation(
                f"round {rounds} did not {'descend' if greatest else 'ascend'}"
            )
        if nxt == env:
            return env, SolveStats(rounds, len(d) * len(lts.states))
        env = nxt


def solve_max(d: Declaration, lts: Lts) -> tuple[dict[Var, int], SolveStats]:
    """Greatest fixed point, iterating downwards from the all-true environment."""
    return _solve(d, lts, greatest=True)


def solve_min(d: Declaration, lts: Lts) -> tuple[dict[Var, int], SolveStats]:
    """Least fixed point, iterating upwards from the all-false environment."""
    return _solve(d, lts, greatest=False)


def solve(d: Declaration, lts: Lts, mode: str = "max"):
    if mode == "max":
        return solve_max(d, lts)
    if mode == "min":
        return solve_min(d, lts)
    raise ValueError(f"mode must be 'max' or 'min', not {mode!r}")


def solve_max_worklist(d: Declaration, lts: Lts) -> dict[Var, int]:
    """Greatest fixed point by chaotic iteration over a dependency worklist.

    Optimization of :func:`solve_max`: only equations whose variables changed
    are re-evaluated.  Must agree with the round-robin solver.
    """
    d.check(lts, total=False)
    readers = defaultdict(set)
    for v, f in d.equations.items():
        for u in variables_of(f):
            readers[u].add(v)
    env = top_env(d, lts)
    work = list(d.equations)
    queued = set(work)
    while work:
        v = work.pop()
        queued.discard(v)
        new = evaluate(d[v], lts, env)
        if new != env[v]:
            if new & ~env[v]:
                raise ChainViolation(f"{v} grew during descending iteration")
            env[v] = new
            for w in readers[v]:
                if w not in queued:
                    queued.add(w)
                    work.append(w)
    return env


def env_to_relation(env, ns: str, lts: Lts) -> frozenset[tuple[int, int]]:
    """``{(p, q) | p in env[ns(q)]}`` over state indices."""
    vars_ = [v for v in env if v.ns == ns]
    if not vars_:
        raise HmlError(f"unknown namespace {ns}")
    pairs = set()
    for v in vars_:
        q = resolve_state(lts, v)
        pairs.update((p, q) for p in iter_bits(env[v]))
    return frozenset(pairs)


def serialize_env(env, lts: Lts, stats: SolveStats | None = None) -> str:
    """Lines ``X(q): p1 p2 ...`` ordered by namespace then state index."""
    order = {v: (v.ns, lts.state_index.get(v.state, -1)) for v in env}
    lines = []
    for v in sorted(env, key=order.__getitem__):
        members = lts.names(env[v])
        lines.append(f"{v}:" + "".join(" " + m for m in members))
    if stats is not None:
        lines.append(f"# iterations={stats.iterations}")
    return "\n".join(lines) + "\n"
