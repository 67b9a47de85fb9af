"""Formula-free reference semantics for every behavioural relation.

Each step function is a direct quantifier-by-quantifier transcription of
the relation's defining clauses, operating on relations represented as
frozensets of ``(p, q)`` state-index pairs.  None of this touches formulae or
bitsets: it is the independent side of the differential tests.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, FrozenSet, Tuple

from charkit.hml import Var
from charkit.lts import Lts
from charkit.semantics import Semantics, check_annotations

Relation = FrozenSet[Tuple[int, int]]


class _Graph:
    """Plain adjacency lists rebuilt from the raw transition set."""

    def __init__(self, lts: Lts):
        self.P = range(len(lts.states))
        self.A = range(len(lts.labels))
        self.out = {(p, a): [] for p in self.P for a in self.A}
        self.inc = {(p, a): [] for p in self.P for a in self.A}
        for p, a, q in sorted(lts.transitions):
            self.out[p, a].append(q)
            self.inc[q, a].append(p)
        self.converges = {p: p not in lts.diverging for p in self.P}
        self.leq = lts.label_preorder
        self.agents = list(lts.agents)
        self.lts = lts

    def indist(self, i, p, q):
        return p == q or (p, q) in self.lts.agents[i]


# Clause-level building blocks.  ``forth`` is "every a-move of p is matched by
# an a-move of q landing in S"; the others are its mirror images.


def _forth(g, S, p, q, a):
    return all(any((p2, q2) in S for q2 in g.out[q, a]) for p2 in g.out[p, a])


def _back(g, S, p, q, a):
    return all(any((p2, q2) in S for p2 in g.out[p, a]) for q2 in g.out[q, a])


def _forth_rev(g, S, p, q, a):
    return all(any((p2, q2) in S for q2 in g.inc[q, a]) for p2 in g.inc[p, a])


def _back_rev(g, S, p, q, a):
    return all(any((p2, q2) in S for p2 in g.inc[p, a]) for q2 in g.inc[q, a])


def _sim(g, S, p, q):
    return all(_forth(g, S, p, q, a) for a in g.A)


def _simgeq(g, S, p, q):
    return all(_back(g, S, p, q, a) for a in g.A)


def _bisim(g, S, p, q):
    return all(_forth(g, S, p, q, a) and _back(g, S, p, q, a) for a in g.A)


def _readysim(g, S, p, q):
    for a in g.A:
        if not _back(g, S, p, q, a):
            return False
        if g.out[p, a] and not g.out[q, a]:
            return False
    return True


def _bfb(g, S, p, q):
    return all(
        _forth(g, S, p, q, a)
        and _back(g, S, p, q, a)
        and _forth_rev(g, S, p, q, a)
        and _back_rev(g, S, p, q, a)
        for a in g.A
    )


def _bfbid(g, S, p, q):
    if not _bfb(g, S, p, q):
        return False
    for i in g.agents:
        for p2 in g.P:
            if g.indist(i, p, p2) and not any(
                g.indist(i, q, q2) and (p2, q2) in S for q2 in g.P
            ):
                return False
        for q2 in g.P:
            if g.indist(i, q, q2) and not any(
                g.indist(i, p, p2) and (p2, q2) in S for p2 in g.P
            ):
                return False
    return True


def _prebis(g, S, p, q):
    # Literal quantifier nesting: "for every a" scopes over both clauses.
    for a in g.A:
        if not _back(g, S, p, q, a):
            return False
        if g.converges[q]:
            if not g.converges[p]:
                return False
            if not _forth(g, S, p, q, a):
                return False
    return True


def _extleq(g, S, p, q):
    for a in g.A:
        for p2 in g.out[p, a]:
            if not any(
                (a, b) in g.leq and any((p2, q2) in S for q2 in g.out[q, b]) for b in g.A
            ):
                return False
    return True


def _extgeq(g, S, p, q):
    for a in g.A:
        for q2 in g.out[q, a]:
            if not any(
                (a, b) in g.leq and any((p2, q2) in S for p2 in g.out[p, b]) for b in g.A
            ):
                return False
    return True


_CLAUSES = {
    Semantics.SIM_LEQ: _sim,
    Semantics.SIM_GEQ: _simgeq,
    Semantics.BISIM: _bisim,
    Semantics.READY_SIM: _readysim,
    Semantics.BFB: _bfb,
    Semantics.BFBID: _bfbid,
    Semantics.PREBIS: _prebis,
    Semantics.EXT_LEQ: _extleq,
    Semantics.EXT_GEQ: _extgeq,
}


@dataclass(frozen=True)
class StepFunction:
    """A monotone map on relations over one LTS, tagged for reporting."""

    tag: str
    fn: Callable[[Lts, Relation], Relation]

    def __call__(self, lts: Lts, s: Relation) -> Relation:
        return self.fn(lts, s)


def step(sem, lts: Lts, s: Relation) -> Relation:
    """The defining function of ``sem`` applied once to ``s``."""
    if isinstance(sem, StepFunction):
        return sem(lts, s)
    sem = Semantics(sem)
    if sem not in _CLAUSES:
        raise ValueError(f"{sem.value} has no step function (it is an intersection)")
    check_annotations(sem, lts)
    g = _Graph(lts)
    holds = _CLAUSES[sem]
    s = frozenset(s)
    return frozenset((p, q) for p in g.P for q in g.P if holds(g, s, p, q))


def step_function(sem) -> StepFunction:
    if isinstance(sem, StepFunction):
        return sem
    sem = Semantics(sem)
    return StepFunction(sem.value, lambda lts, s: step(sem, lts, s))


def inverse(r: Relation) -> Relation:
    return frozenset((q, p) for p, q in r)


def star(sem) -> StepFunction:
    """``S -> step(inverse(S))^-1``; its greatest fixed point is the inverse of ``sem``'s."""
    base = step_function(sem)
    return StepFunction(base.tag + "*", lambda lts, s: inverse(base(lts, inverse(s))))


def full_relation(lts: Lts) -> Relation:
    P = range(len(lts.states))
    return frozenset((p, q) for p in P for q in P)


def identity(lts: Lts) -> Relation:
    return frozenset((p, p) for p in range(len(lts.states)))


def gfp(sem, lts: Lts) -> Relation:
    """Greatest fixed point by descending iteration from the full relation."""
    f = step_function(sem)
    s = full_relation(lts)
    while True:
        nxt = f(lts, s)
        assert nxt <= s, f"{f.tag}: iteration from the top did not descend"
        if nxt == s:
            return s
        s = nxt


def lfp(sem, lts: Lts) -> Relation:
    """Least fixed point by ascending iteration from the empty relation."""
    f = step_function(sem)
    s: Relation = frozenset()
    while True:
        nxt = f(lts, s)
        assert s <= nxt, f"{f.tag}: iteration from the bottom did not ascend"
        if nxt == s:
            return s
        s = nxt


def oracle_relation(sem, lts: Lts) -> Relation:
    """The relation ``sem`` denotes, computed without formulae.

    Simulation equivalence is the intersection of the simulation preorder
    with its inverse.
    """
    sem = Semantics(sem)
    if sem is Semantics.SIM_EQ:
        leq = gfp(Semantics.SIM_LEQ, lts)
        return leq & inverse(leq)
    return gfp(sem, lts)


def sigma_of_relation(s: Relation, ns: str, lts: Lts) -> dict[Var, int]:
    """The environment mapping ``ns(q)`` to ``{p | (p, q) in s}``."""
    env = {Var(ns, q): 0 for q in lts.states}
    for p, q in s:
        env[Var(ns, lts.states[q])] |= 1 << p
    return env


def serialize_relation(r: Relation, lts: Lts) -> str:
    return "".join(f"{lts.states[p]} {lts.states[q]}\n" for p, q in sorted(r))


def parse_relation(text: str, lts: Lts) -> Relation:
    pairs = set()
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            p, q = line.split()
            pairs.add((lts.state_id(p), lts.state_id(q)))
    return frozenset(pairs)
