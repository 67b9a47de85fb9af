"""Characteristic declarations for each behavioural relation.

For a relation defined as the greatest fixed point of a monotone function
``F`` on state pairs, :func:`gen` emits one equation ``X(q) = body_q`` per
state such that, for every relation ``S``, ``p`` satisfies ``body_q`` under
the environment ``X(q) -> {p | (p, q) in S}`` exactly when ``(p, q)`` is in
``F(S)``.  The largest solution of the declaration is then the relation
itself, read column by column.

Conjuncts are emitted labels-first in declaration order, then target states
by index, so output is byte-stable.  Single-child conjunctions and
disjunctions collapse to their child; empty ones become ``tt`` and ``ff``.
"""

from __future__ import annotations

from dataclasses import dataclass

from charkit import oracle
from charkit.hml import (
    FF,
    TT,
    And,
    Or,
    Declaration,
    Formula,
    Var,
    agent_box,
    agent_dia,
    back_box,
    back_dia,
    box,
    conj,
    dia,
    disj,
    evaluate,
    strict_box,
)
from charkit.lts import Lts, iter_bits
from charkit.semantics import Semantics, check_annotations


@dataclass(frozen=True)
class GeneratedSystem:
    semantics: Semantics
    declaration: Declaration
    mode: str = "max"

    @property
    def namespaces(self) -> list[str]:
        return self.declaration.namespaces

    def query(self, q: str) -> Formula:
        """Formula whose truth at ``p`` decides whether ``(p, q)`` is related."""
        if self.semantics is Semantics.SIM_EQ:
            return And([Var("X", q), Var("Y", q)])
        return Var(self.namespaces[0], q)

    @property
    def query_pattern(self) -> str:
        return "X(q) /\\ Y(q)" if self.semantics is Semantics.SIM_EQ else f"{self.namespaces[0]}(q)"

    def relation(self, env, lts: Lts) -> oracle.Relation:
        """All ``(p, q)`` such that ``p`` satisfies ``query(q)`` under ``env``."""
        pairs = set()
        for q, name in enumerate(lts.states):
            for p in iter_bits(evaluate(self.query(name), lts, env)):
                pairs.add((p, q))
        return frozenset(pairs)

    def header(self) -> str:
        return f"semantics: {self.semantics.value}, mode: {self.mode}, query: {self.query_pattern}"


def _keep(node):
    return lambda fs: node(list(fs))


class _Builder:
    def __init__(self, lts: Lts, collapse: bool = True):
        self.lts = lts
        self.S = lts.states
        self.L = lts.labels
        self.conj = conj if collapse else _keep(And)
        self.disj = disj if collapse else _keep(Or)

    def post(self, q, a):
        return iter_bits(self.lts.succ_masks[q][a])

    def pre(self, q, a):
        return iter_bits(self.lts.pred_masks[q][a])

    # every a-move of the left state lands in X(r) for some a-successor r of q
    def must_forth(self, ns, q):
        return self.conj(
            box(a, self.disj(Var(ns, self.S[r]) for r in self.post(q, i)))
            for i, a in enumerate(self.L)
        )

    # every a-successor of q is matched by some a-move of the left state
    def may_forth(self, ns, q):
        return self.conj(
            dia(a, Var(ns, self.S[r])) for i, a in enumerate(self.L) for r in self.post(q, i)
        )

    def must_back(self, ns, q):
        return self.conj(
            back_box(a, self.disj(Var(ns, self.S[r]) for r in self.pre(q, i)))
            for i, a in enumerate(self.L)
        )

    def may_back(self, ns, q):
        return self.conj(
            back_dia(a, Var(ns, self.S[r])) for i, a in enumerate(self.L) for r in self.pre(q, i)
        )

    def must_agent(self, ns, q):
        return self.conj(
            agent_box(ag, self.disj(Var(ns, self.S[r]) for r in iter_bits(rows[q])))
            for ag, rows in self.lts.agent_masks.items()
        )

    def may_agent(self, ns, q):
        return self.conj(
            agent_dia(ag, Var(ns, self.S[r]))
            for ag, rows in self.lts.agent_masks.items()
            for r in iter_bits(rows[q])
        )

    def refusals(self, q):
        return self.conj(box(a, FF) for i, a in enumerate(self.L) if not self.lts.succ_masks[q][i])

    def strict_must_forth(self, ns, q):
        return self.conj(
            strict_box(a, self.disj(Var(ns, self.S[r]) for r in self.post(q, i)))
            for i, a in enumerate(self.L)
        )

    def above(self, i):
        return [j for j in range(len(self.L)) if (i, j) in self.lts.label_preorder]

    def ext_must(self, ns, q):
        return self.conj(
            box(a, self.disj(Var(ns, self.S[r]) for j in self.above(i) for r in self.post(q, j)))
            for i, a in enumerate(self.L)
        )

    def ext_may(self, ns, q):
        return self.conj(
            self.disj(dia(self.L[j], Var(ns, self.S[r])) for j in self.above(i))
            for i in range(len(self.L))
            for r in self.post(q, i)
        )


def _bodies(sem: Semantics, b: _Builder, q: int) -> list[tuple[str, Formula]]:
    X, Y = "X", "Y"
    if sem is Semantics.SIM_LEQ:
        return [(X, b.must_forth(X, q))]
    if sem is Semantics.SIM_GEQ:
        return [(Y, b.may_forth(Y, q))]
    if sem is Semantics.SIM_EQ:
        return [(X, b.must_forth(X, q)), (Y, b.may_forth(Y, q))]
    if sem is Semantics.BISIM:
        return [(X, b.conj([b.must_forth(X, q), b.may_forth(X, q)]))]
    if sem is Semantics.READY_SIM:
        return [(X, b.conj([b.may_forth(X, q), b.refusals(q)]))]
    if sem is Semantics.BFB:
        return [
            (X, b.conj([b.must_forth(X, q), b.may_forth(X, q), b.must_back(X, q), b.may_back(X, q)]))
        ]
    if sem is Semantics.BFBID:
        groups = [
            b.must_forth(X, q),
            b.may_forth(X, q),
            b.must_back(X, q),
            b.may_back(X, q),
            b.must_agent(X, q),
            b.may_agent(X, q),
        ]
        return [(X, b.conj(groups))]
    if sem is Semantics.PREBIS:
        guarded = [b.strict_must_forth(X, q)]
        if q in b.lts.diverging:
            guarded.append(TT)
        return [(X, b.conj([b.may_forth(X, q), b.disj(guarded)]))]
    if sem is Semantics.EXT_LEQ:
        return [(X, b.ext_must(X, q))]
    if sem is Semantics.EXT_GEQ:
        return [(Y, b.ext_may(Y, q))]
    raise ValueError(f"no construction for {sem!r}")


def gen(sem, lts: Lts, *, collapse: bool = True) -> GeneratedSystem:
    """The characteristic declaration of ``sem`` over ``lts`` (solved for its largest fixed point).

    ``collapse=False`` keeps empty and single-child And/Or nodes as built.
    """
    sem = Semantics(sem)
    check_annotations(sem, lts)
    b = _Builder(lts, collapse)
    per_ns: dict[str, dict[Var, Formula]] = {}
    for q, name in enumerate(lts.states):
        for ns, body in _bodies(sem, b, q):
            per_ns.setdefault(ns, {})[Var(ns, name)] = body
    equations = {v: f for eqs in per_ns.values() for v, f in eqs.items()}
    return GeneratedSystem(sem, Declaration(equations), "max")


COMPONENTS = {
    Semantics.SIM_EQ: {"X": Semantics.SIM_LEQ, "Y": Semantics.SIM_GEQ},
}


def expresses_upto_mismatches(sem, lts: Lts, s, s_y=None, *, system=None) -> list[tuple]:
    """Pairs where satisfaction of the generated body under sigma_S disagrees with F(S).

    Each entry is ``(namespace, p, q, formula_verdict, oracle_verdict)``.
    For simulation equivalence the X and Y halves are checked against the
    simulation preorder and its inverse step function; ``s_y`` (default
    ``s``) supplies the relation for the Y namespace.
    """
    sem = Semantics(sem)
    system = system or gen(sem, lts)
    components = COMPONENTS.get(sem, {system.namespaces[0]: sem})
    rels = {ns: frozenset(s) for ns in components}
    if s_y is not None and "Y" in rels:
        rels["Y"] = frozenset(s_y)
    env = {}
    for ns, r in rels.items():
        env.update(oracle.sigma_of_relation(r, ns, lts))
    bad = []
    for ns, component in components.items():
        image = oracle.step(component, lts, rels[ns])
        for q, qname in enumerate(lts.states):
            sat = evaluate(system.declaration[Var(ns, qname)], lts, env)
            for p in range(len(lts.states)):
                lhs = bool(sat >> p & 1)
                rhs = (p, q) in image
                if lhs != rhs:
                    bad.append((ns, p, q, lhs, rhs))
    return bad


def expresses_upto_check(sem, lts: Lts, s, s_y=None) -> bool:
    """Whether the generated declaration expresses ``sem``'s function up to ``s``."""
    return not expresses_upto_mismatches(sem, lts, s, s_y)
