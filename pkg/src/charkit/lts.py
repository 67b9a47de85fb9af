"""Finite labelled transition systems and their annotations.

States and labels are interned to dense indices; state sets are plain Python
ints used as bitsets (bit ``p`` set iff state ``p`` is a member).  An
:class:`Lts` may carry three optional annotations:

* ``diverging`` - states that do *not* converge (everything else converges),
* ``label_preorder`` - pairs ``(a, b)`` meaning ``a`` is below ``b``,
* ``agents`` - per-agent indistinguishability pairs; reflexivity is implicit.

Text format::

    states: p q r
    labels: a b
    trans: p a q
    diverge: r
    labelle: a b
    agent: alice p q
"""

from __future__ import annotations

import math
import random
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping

NAME_RE = re.compile(r"[A-Za-z0-9_][A-Za-z0-9_.'$-]*\Z")

SECTIONS = ("states", "labels", "trans", "diverge", "labelle", "agent")


class LtsError(ValueError):
    """Raised for malformed LTS documents or invalid LTS values."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def iter_bits(mask: int):
    """Yield the indices of the set bits of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(indices: Iterable[int]) -> int:
    m = 0
    for i in indices:
        m |= 1 << i
    return m


@dataclass(frozen=True)
class Lts:
    states: tuple[str, ...]
    labels: tuple[str, ...]
    transitions: frozenset[tuple[int, int, int]] = frozenset()
    diverging: frozenset[int] = frozenset()
    label_preorder: frozenset[tuple[int, int]] = frozenset()
    agents: Mapping[str, frozenset[tuple[int, int]]] = field(default_factory=dict)

    @classmethod
    def build(
        cls,
        states: Iterable[str],
        labels: Iterable[str],
        transitions: Iterable[tuple[str, str, str]] = (),
        diverging: Iterable[str] = (),
        label_preorder: Iterable[tuple[str, str]] = (),
        agents: Mapping[str, Iterable[tuple[str, str]]] | None = None,
    ) -> "Lts":
        """Construct from names rather than indices.  Raises LtsError on unknown names."""
        states = tuple(states)
        labels = tuple(labels)
        si = {s: i for i, s in enumerate(states)}
        li = {a: i for i, a in enumerate(labels)}

        def st(name):
            if name not in si:
                raise LtsError(f"undeclared state {name}")
            return si[name]

        def lb(name):
            if name not in li:
                raise LtsError(f"undeclared label {name}")
            return li[name]

        return cls(
            states=states,
            labels=labels,
            transitions=frozenset((st(p), lb(a), st(q)) for p, a, q in transitions),
            diverging=frozenset(st(p) for p in diverging),
            label_preorder=frozenset((lb(a), lb(b)) for a, b in label_preorder),
            agents={
                i: frozenset((st(p), st(q)) for p, q in pairs)
                for i, pairs in (agents or {}).items()
            },
        )

    @property
    def n(self) -> int:
        return len(self.states)

    @property
    def all_states(self) -> int:
        return (1 << len(self.states)) - 1

    @cached_property
    def state_index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.states)}

    @cached_property
    def label_index(self) -> dict[str, int]:
        return {a: i for i, a in enumerate(self.labels)}

    def state_id(self, p: str | int) -> int:
        if isinstance(p, int):
            if not 0 <= p < len(self.states):
                raise LtsError(f"undeclared state index {p}")
            return p
        try:
            return self.state_index[p]
        except KeyError:
            raise LtsError(f"undeclared state {p}") from None

    def label_id(self, a: str | int) -> int:
        if isinstance(a, int):
            if not 0 <= a < len(self.labels):
                raise LtsError(f"undeclared label index {a}")
            return a
        try:
            return self.label_index[a]
        except KeyError:
            raise LtsError(f"undeclared label {a}") from None

    def names(self, mask: int) -> list[str]:
        return [self.states[p] for p in iter_bits(mask)]

    # Bitset adjacency, built once per LTS.

    @cached_property
    def succ_masks(self) -> list[list[int]]:
        table = [[0] * len(self.labels) for _ in self.states]
        for p, a, q in self.transitions:
            table[p][a] |= 1 << q
        return table

    @cached_property
    def pred_masks(self) -> list[list[int]]:
        table = [[0] * len(self.labels) for _ in self.states]
        for p, a, q in self.transitions:
            table[q][a] |= 1 << p
        return table

    @cached_property
    def diverging_mask(self) -> int:
        return mask_of(self.diverging)

    @cached_property
    def agent_masks(self) -> dict[str, list[int]]:
        """For each agent, the image of every state under pairs plus identity."""
        out = {}
        for agent, pairs in self.agents.items():
            row = [1 << p for p in range(len(self.states))]
            for p, q in pairs:
                row[p] |= 1 << q
            out[agent] = row
        return out

    def indistinguishable(self, agent: str, p: int, q: int) -> bool:
        return p == q or (p, q) in self.agents[agent]


def successors(lts: Lts, p: str | int, a: str | int) -> frozenset[str]:
    """States reachable from ``p`` by one ``a``-transition."""
    return frozenset(lts.names(lts.succ_masks[lts.state_id(p)][lts.label_id(a)]))


def predecessors(lts: Lts, p: str | int, a: str | int) -> frozenset[str]:
    """States with an ``a``-transition into ``p``."""
    return frozenset(lts.names(lts.pred_masks[lts.state_id(p)][lts.label_id(a)]))


def enabled(lts: Lts, p: str | int) -> frozenset[str]:
    row = lts.succ_masks[lts.state_id(p)]
    return frozenset(lts.labels[a] for a, m in enumerate(row) if m)


def close_preorder(pairs: Iterable[tuple[int, int]], n: int) -> frozenset[tuple[int, int]]:
    """Reflexive-transitive closure of ``pairs`` over ``range(n)``."""
    reach = [[i == j for j in range(n)] for i in range(n)]
    for a, b in pairs:
        reach[a][b] = True
    for k in range(n):
        for i in range(n):
            if reach[i][k]:
                for j in range(n):
                    if reach[k][j]:
                        reach[i][j] = True
    return frozenset((i, j) for i in range(n) for j in range(n) if reach[i][j])


def validate(lts: Lts, *, extended: bool = False) -> list[str]:
    """Return every invariant violation of ``lts``; an empty list means valid.

    With ``extended=True`` the label preorder is checked even when empty, as
    extended simulation needs it.
    """
    out = []
    n, k = len(lts.states), len(lts.labels)
    if n < 1:
        out.append("no states declared")
    for kind, names in (("state", lts.states), ("label", lts.labels), ("agent", tuple(lts.agents))):
        seen = set()
        for name in names:
            if not NAME_RE.match(name):
                out.append(f"invalid {kind} name {name!r}")
            if name in seen:
                out.append(f"duplicate {kind} {name}")
            seen.add(name)

    def bad_state(p):
        return not (isinstance(p, int) and 0 <= p < n)

    def bad_label(a):
        return not (isinstance(a, int) and 0 <= a < k)

    for p, a, q in sorted(lts.transitions):
        if bad_state(p) or bad_state(q):
            out.append(f"transition {(p, a, q)} has an undeclared state")
        if bad_label(a):
            out.append(f"transition {(p, a, q)} has an undeclared label")
    for p in sorted(lts.diverging):
        if bad_state(p):
            out.append(f"diverging state {p} undeclared")

    out += preorder_violations(lts, extended=extended)

    for agent, pairs in lts.agents.items():
        if any(bad_state(p) or bad_state(q) for p, q in pairs):
            out.append(f"agent relation for {agent} mentions an undeclared state")
            continue
        rel = set(pairs) | {(p, p) for p in range(n)}
        for p, q in sorted(rel):
            if (q, p) not in rel:
                out.append(
                    f"agent relation not symmetric for {agent}: "
                    f"{lts.states[p]} {lts.states[q]}"
                )
        for p, q in sorted(rel):
            for r, s in sorted(rel):
                if q == r and (p, s) not in rel:
                    out.append(
                        f"agent relation not transitive for {agent}: "
                        f"{lts.states[p]} {lts.states[q]} {lts.states[s]}"
                    )
    return out


def preorder_violations(lts: Lts, *, extended: bool = False) -> list[str]:
    """Reflexivity and transitivity problems of the label preorder."""
    out = []
    k = len(lts.labels)
    order = lts.label_preorder
    if any(not (0 <= a < k and 0 <= b < k) for a, b in order):
        return ["label preorder mentions an undeclared label"]
    if order or extended:
        for a in range(k):
            if (a, a) not in order:
                out.append(f"preorder not reflexive at {lts.labels[a]}")
        for a, b in sorted(order):
            for c, d in sorted(order):
                if b == c and (a, d) not in order:
                    out.append(
                        "preorder not transitive: "
                        f"{lts.labels[a]} <= {lts.labels[b]} <= {lts.labels[d]}"
                    )
    return out


def parse_lts(text: str, *, close: bool = False) -> Lts:
    """Parse and validate an LTS document.

    Sections may repeat and appear in any order; references are resolved
    after all ``states:``/``labels:`` lines are read.  ``close=True`` replaces
    the label preorder by its reflexive-transitive closure before validation.
    """
    states: list[str] = []
    labels: list[str] = []
    state_line: dict[str, int] = {}
    label_line: dict[str, int] = {}
    refs: list[tuple[str, list[str], int]] = []

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        key = key.strip()
        if not sep or key not in SECTIONS:
            raise LtsError(f"expected one of {', '.join(s + ':' for s in SECTIONS)}", lineno)
        toks = rest.split()
        for tok in toks:
            if not NAME_RE.match(tok):
                raise LtsError(f"invalid name {tok!r}", lineno)
        if key in ("states", "labels"):
            names, where = (states, state_line) if key == "states" else (labels, label_line)
            for tok in toks:
                if tok in where:
                    raise LtsError(
                        f"duplicate {key[:-1]} {tok} (first declared on line {where[tok]})", lineno
                    )
                where[tok] = lineno
                names.append(tok)
        else:
            arity = {"trans": 3, "labelle": 2, "agent": 3}.get(key)
            if arity is not None and len(toks) != arity:
                raise LtsError(f"{key}: expects {arity} names, got {len(toks)}", lineno)
            refs.append((key, toks, lineno))

    si = {s: i for i, s in enumerate(states)}
    li = {a: i for i, a in enumerate(labels)}

    def st(name, lineno):
        if name not in si:
            raise LtsError(f"undeclared state {name}", lineno)
        return si[name]

    def lb(name, lineno):
        if name not in li:
            raise LtsError(f"undeclared label {name}", lineno)
        return li[name]

    trans, diverge, order = set(), set(), set()
    agents: dict[str, set[tuple[int, int]]] = {}
    for key, toks, ln in refs:
        if key == "trans":
            trans.add((st(toks[0], ln), lb(toks[1], ln), st(toks[2], ln)))
        elif key == "diverge":
            diverge.update(st(t, ln) for t in toks)
        elif key == "labelle":
            order.add((lb(toks[0], ln), lb(toks[1], ln)))
        else:
            agents.setdefault(toks[0], set()).add((st(toks[1], ln), st(toks[2], ln)))

    if close and order:
        order = close_preorder(order, len(labels))
    lts = Lts(
        states=tuple(states),
        labels=tuple(labels),
        transitions=frozenset(trans),
        diverging=frozenset(diverge),
        label_preorder=frozenset(order),
        agents={i: frozenset(pairs) for i, pairs in agents.items()},
    )
    problems = validate(lts)
    if problems:
        raise LtsError("; ".join(problems))
    return lts


def serialize_lts(lts: Lts) -> str:
    s, a = lts.states, lts.labels
    lines = [
        "states: " + " ".join(s),
        "labels: " + " ".join(a) if a else "labels:",
    ]
    lines += [f"trans: {s[p]} {a[x]} {s[q]}" for p, x, q in sorted(lts.transitions)]
    if lts.diverging:
        lines.append("diverge: " + " ".join(s[p] for p in sorted(lts.diverging)))
    lines += [f"labelle: {a[x]} {a[y]}" for x, y in sorted(lts.label_preorder)]
    for agent, pairs in lts.agents.items():
        lines += [f"agent: {agent} {s[p]} {s[q]}" for p, q in sorted(pairs)]
    return "\n".join(lines) + "\n"


def label_name(i: int) -> str:
    return "abcdefghijklmnopqrstuvwxyz"[i] if i < 26 else f"l{i}"


def random_lts(
    num_states: int,
    num_labels: int,
    edge_density: float,
    seed: int,
    *,
    diverge: bool = False,
    preorder: bool = False,
    agents: bool = False,
    diverge_prob: float = 0.3,
    max_agents: int = 2,
) -> Lts:
    """Deterministic random LTS.

    Each possible transition is present with probability ``edge_density``.
    Annotations draw from their own seeded streams, so switching one on does
    not change the transition structure.  The preorder is the
    reflexive-transitive closure of ``ceil(num_labels / 2)`` random pairs;
    each agent relation is a random partition of the states.
    """
    if num_states < 1 or num_labels < 1:
        raise ValueError("need at least one state and one label")
    rng = random.Random(seed)
    n, k = num_states, num_labels
    trans = frozenset(
        (p, a, q)
        for p in range(n)
        for a in range(k)
        for q in range(n)
        if rng.random() < edge_density
    )
    div = frozenset()
    if diverge:
        r = random.Random(f"{seed}/diverge")
        div = frozenset(p for p in range(n) if r.random() < diverge_prob)
    order = frozenset()
    if preorder:
        r = random.Random(f"{seed}/preorder")
        pairs = [(r.randrange(k), r.randrange(k)) for _ in range(math.ceil(k / 2))]
        order = close_preorder(pairs, k)
    rels = {}
    if agents:
        r = random.Random(f"{seed}/agents")
        for i in range(r.randint(0, max_agents)):
            blocks = r.randint(1, n)
            block = [r.randrange(blocks) for _ in range(n)]
            rels[f"i{i}"] = frozenset(
                (p, q) for p in range(n) for q in range(n) if block[p] == block[q]
            )
    return Lts(
        states=tuple(f"s{i}" for i in range(n)),
        labels=tuple(label_name(i) for i in range(k)),
        transitions=trans,
        diverging=div,
        label_preorder=order,
        agents=rels,
    )
