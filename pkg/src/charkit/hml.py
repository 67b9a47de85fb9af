"""Hennessy-Milner logic with recursion.

Formulae are immutable trees over ``tt``, ``ff``, variables, n-ary ``And`` /
``Or`` and modalities.  A modality has a *kind* (forward over a label,
backward over a label, or over an agent's indistinguishability relation) and
a *flavor* (diamond, box, or the convergence-strict box that additionally
requires the current state to converge).  There is no negation, so every
formula is monotone in the environment.

State sets are bitsets (see :mod:`charkit.lts`).  An environment is a plain
``dict`` from :class:`Var` to such a bitset.

ASCII syntax::

    tt  ff  X(q)  F /\\ G  F \\/ G  <a>F  [a]F  <~a>F  [~a]F
    <i:agent>F  [i:agent]F  [!a]F

``/\\`` binds tighter than ``\\/``; modal prefixes bind tightest.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Iterable, Mapping, NamedTuple, Union

from charkit.lts import Lts, LtsError, NAME_RE

FORWARD, BACKWARD, AGENT = "fwd", "bwd", "agent"
DIAMOND, BOX, STRICT_BOX = "dia", "box", "strict"


class HmlError(ValueError):
    pass


class FormulaSyntaxError(HmlError):
    def __init__(self, message: str, pos: int, text: str = ""):
        self.pos = pos
        where = f" at position {pos}"
        if text:
            where += f": {text[:pos]}<HERE>{text[pos:]}"
        super().__init__(message + where)


class Var(NamedTuple):
    """A recursion variable, e.g. ``X(q)``: a namespace token plus a state name."""

    ns: str
    state: str

    def __str__(self):
        return f"{self.ns}({self.state})"


@dataclass(frozen=True)
class Tt:
    def __repr__(self):
        return "TT"


@dataclass(frozen=True)
class Ff:
    def __repr__(self):
        return "FF"


TT = Tt()
FF = Ff()


@dataclass(frozen=True)
class And:
    children: tuple

    def __init__(self, children: Iterable = ()):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Or:
    children: tuple

    def __init__(self, children: Iterable = ()):
        object.__setattr__(self, "children", tuple(children))


@dataclass(frozen=True)
class Mod:
    kind: str
    name: str
    flavor: str
    child: "Formula"

    def __post_init__(self):
        if self.kind not in (FORWARD, BACKWARD, AGENT):
            raise HmlError(f"unknown modality kind {self.kind!r}")
        if self.flavor not in (DIAMOND, BOX, STRICT_BOX):
            raise HmlError(f"unknown modality flavor {self.flavor!r}")
        if self.flavor == STRICT_BOX and self.kind != FORWARD:
            raise HmlError("the strict box only combines with forward labels")


Formula = Union[Tt, Ff, Var, And, Or, Mod]


def dia(a, f):
    return Mod(FORWARD, a, DIAMOND, f)


def box(a, f):
    return Mod(FORWARD, a, BOX, f)


def strict_box(a, f):
    return Mod(FORWARD, a, STRICT_BOX, f)


def back_dia(a, f):
    return Mod(BACKWARD, a, DIAMOND, f)


def back_box(a, f):
    return Mod(BACKWARD, a, BOX, f)


def agent_dia(i, f):
    return Mod(AGENT, i, DIAMOND, f)


def agent_box(i, f):
    return Mod(AGENT, i, BOX, f)


def conj(fs) -> Formula:
    """Big conjunction: empty gives ``tt``, a single conjunct is returned as is."""
    fs = list(fs)
    if not fs:
        return TT
    return fs[0] if len(fs) == 1 else And(fs)


def disj(fs) -> Formula:
    """Big disjunction: empty gives ``ff``, a single disjunct is returned as is."""
    fs = list(fs)
    if not fs:
        return FF
    return fs[0] if len(fs) == 1 else Or(fs)


def normalize(f: Formula) -> Formula:
    """Collapse empty and single-child And/Or nodes throughout ``f``."""
    if isinstance(f, And):
        return conj(normalize(g) for g in f.children)
    if isinstance(f, Or):
        return disj(normalize(g) for g in f.children)
    if isinstance(f, Mod):
        return Mod(f.kind, f.name, f.flavor, normalize(f.child))
    return f


def subformulae(f: Formula):
    yield f
    if isinstance(f, (And, Or)):
        for g in f.children:
            yield from subformulae(g)
    elif isinstance(f, Mod):
        yield from subformulae(f.child)


def variables_of(f: Formula) -> set[Var]:
    return {g for g in subformulae(f) if isinstance(g, Var)}


def depth(f: Formula) -> int:
    if isinstance(f, (And, Or)):
        return 1 + max((depth(g) for g in f.children), default=0)
    if isinstance(f, Mod):
        return 1 + depth(f.child)
    return 0


# Evaluation


def evaluate(f: Formula, lts: Lts, env: Mapping[Var, int]) -> int:
    """Bitset of the states at which ``f`` holds under ``env``."""
    full = lts.all_states
    n = len(lts.states)
    memo: dict[int, int] = {}

    def label(a):
        try:
            return lts.label_index[a]
        except KeyError:
            raise HmlError(f"undeclared label {a}") from None

    def ev(g) -> int:
        key = id(g)
        if key in memo:
            return memo[key]
        if isinstance(g, Var):
            try:
                res = env[g]
            except KeyError:
                raise HmlError(f"unbound variable {g}") from None
        elif g is TT or isinstance(g, Tt):
            res = full
        elif g is FF or isinstance(g, Ff):
            res = 0
        elif isinstance(g, And):
            res = full
            for c in g.children:
                res &= ev(c)
        elif isinstance(g, Or):
            res = 0
            for c in g.children:
                res |= ev(c)
        elif isinstance(g, Mod):
            inner = ev(g.child)
            if g.kind == FORWARD:
                a = label(g.name)
                rows = [r[a] for r in lts.succ_masks]
            elif g.kind == BACKWARD:
                a = label(g.name)
                rows = [r[a] for r in lts.pred_masks]
            else:
                try:
                    rows = lts.agent_masks[g.name]
                except KeyError:
                    raise HmlError(f"undeclared agent {g.name}") from None
            res = 0
            if g.flavor == DIAMOND:
                for p in range(n):
                    if rows[p] & inner:
                        res |= 1 << p
            else:
                for p in range(n):
                    if not rows[p] & ~inner:
                        res |= 1 << p
                if g.flavor == STRICT_BOX:
                    res &= ~lts.diverging_mask
        else:
            raise HmlError(f"not a formula: {g!r}")
        memo[key] = res
        return res

    return ev(f)


def satisfies(lts: Lts, env: Mapping[Var, int], p: str | int, f: Formula) -> bool:
    return bool(evaluate(f, lts, env) >> lts.state_id(p) & 1)


@dataclass(frozen=True)
class Declaration:
    """One equation per variable.  ``equations`` keeps insertion order."""

    equations: Mapping[Var, Formula]

    def __getitem__(self, v: Var) -> Formula:
        return self.equations[v]

    def __iter__(self):
        return iter(self.equations)

    def __len__(self):
        return len(self.equations)

    @property
    def namespaces(self) -> list[str]:
        return list(dict.fromkeys(v.ns for v in self.equations))

    def free_variables(self) -> set[Var]:
        used = set()
        for f in self.equations.values():
            used |= variables_of(f)
        return used - set(self.equations)

    def check(self, lts: Lts, *, total: bool = True) -> None:
        """Raise HmlError unless closed (and, with ``total``, one equation per state and namespace)."""
        free = self.free_variables()
        if free:
            raise HmlError("free variables: " + ", ".join(sorted(map(str, free))))
        for v in self.equations:
            if v.state not in lts.state_index:
                raise HmlError(f"variable {v} names an undeclared state")
        if total:
            for ns in self.namespaces:
                missing = [q for q in lts.states if Var(ns, q) not in self.equations]
                if missing:
                    raise HmlError(f"no equation for {ns}({missing[0]})")


def top_env(d: Declaration, lts: Lts) -> dict[Var, int]:
    return {v: lts.all_states for v in d}


def bottom_env(d: Declaration, lts: Lts) -> dict[Var, int]:
    return {v: 0 for v in d}


def apply_declaration(d: Declaration, lts: Lts, env: Mapping[Var, int]) -> dict[Var, int]:
    """One application of the declaration's semantic operator to ``env``."""
    if env.keys() != d.equations.keys():
        raise HmlError("environment and declaration have different domains")
    return {v: evaluate(f, lts, env) for v, f in d.equations.items()}


def env_leq(a: Mapping[Var, int], b: Mapping[Var, int]) -> bool:
    """Pointwise inclusion."""
    if a.keys() != b.keys():
        raise HmlError("environments have different domains")
    return all(a[v] & ~b[v] == 0 for v in a)


# Text syntax

_TOKEN = re.compile(
    r"""\s*(?:
        (?P<and>/\\)
      | (?P<or>\\/)
      | (?P<lpar>\()
      | (?P<rpar>\))
      | (?P<var>[A-Z][A-Za-z0-9_]*)\(\s*(?P<vstate>[^()\s]+)\s*\)
      | (?P<const>tt|ff)\b
      | (?P<mod><[^<>]*>|\[[^\[\]]*\])
    )""",
    re.VERBOSE,
)


def _tokenize(text: str):
    pos = 0
    toks = []
    while True:
        while pos < len(text) and text[pos].isspace():
            pos += 1
        if pos == len(text):
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError("unexpected input", pos, text)
        kind = m.lastgroup if m.lastgroup != "vstate" else "var"
        toks.append((kind, m, pos))
        pos = m.end()
    toks.append(("end", None, len(text)))
    return toks


def _modality(tok: str, pos: int, text: str):
    diamond = tok[0] == "<"
    body = tok[1:-1].strip()
    if body.startswith("!"):
        if diamond:
            raise FormulaSyntaxError("strict modality only exists as a box [!a]", pos, text)
        kind, flavor, name = FORWARD, STRICT_BOX, body[1:].strip()
    elif body.startswith("~"):
        kind, flavor, name = BACKWARD, None, body[1:].strip()
    elif body.startswith("i:"):
        kind, flavor, name = AGENT, None, body[2:].strip()
    else:
        kind, flavor, name = FORWARD, None, body
    if not NAME_RE.match(name):
        raise FormulaSyntaxError(f"unknown modality token {tok!r}", pos, text)
    return kind, flavor or (DIAMOND if diamond else BOX), name


def parse_formula(text: str) -> Formula:
    toks = _tokenize(text)
    i = 0

    def peek():
        return toks[i][0]

    def take():
        nonlocal i
        t = toks[i]
        i += 1
        return t

    def disjunction():
        parts = [conjunction()]
        while peek() == "or":
            take()
            parts.append(conjunction())
        return parts[0] if len(parts) == 1 else Or(parts)

    def conjunction():
        parts = [unary()]
        while peek() == "and":
            take()
            parts.append(unary())
        return parts[0] if len(parts) == 1 else And(parts)

    def unary():
        kind, m, pos = take()
        if kind == "mod":
            k, flavor, name = _modality(m.group("mod"), pos, text)
            return Mod(k, name, flavor, unary())
        if kind == "const":
            return TT if m.group("const") == "tt" else FF
        if kind == "var":
            return Var(m.group("var"), m.group("vstate"))
        if kind == "lpar":
            f = disjunction()
            kind, _, pos = take()
            if kind != "rpar":
                raise FormulaSyntaxError("expected ')'", pos, text)
            return f
        raise FormulaSyntaxError("expected a formula", pos, text)

    f = disjunction()
    if peek() != "end":
        raise FormulaSyntaxError("trailing input", toks[i][2], text)
    return f


def _mod_prefix(m: Mod) -> str:
    if m.flavor == STRICT_BOX:
        return f"[!{m.name}]"
    body = {FORWARD: m.name, BACKWARD: "~" + m.name, AGENT: "i:" + m.name}[m.kind]
    return f"<{body}>" if m.flavor == DIAMOND else f"[{body}]"


def print_formula(f: Formula) -> str:
    """Deterministic ASCII rendering; ``parse_formula`` inverts it up to :func:`normalize`."""
    f = normalize(f)

    def show(g) -> str:
        if isinstance(g, Tt):
            return "tt"
        if isinstance(g, Ff):
            return "ff"
        if isinstance(g, Var):
            return str(g)
        if isinstance(g, And):
            return " /\\ ".join(
                f"({show(c)})" if isinstance(c, (And, Or)) else show(c) for c in g.children
            )
        if isinstance(g, Or):
            return " \\/ ".join(f"({show(c)})" if isinstance(c, Or) else show(c) for c in g.children)
        if isinstance(g, Mod):
            inner = show(g.child)
            if isinstance(g.child, (And, Or)):
                inner = f"({inner})"
            return _mod_prefix(g) + inner
        raise HmlError(f"not a formula: {g!r}")

    return show(f)


# Declaration files: one ``max X(q) = F`` or ``min X(q) = F`` per line.

_EQUATION = re.compile(r"(max|min)\s+([A-Z][A-Za-z0-9_]*)\(\s*([^()\s]+)\s*\)\s*=(.*)\Z")


def parse_declaration(text: str) -> tuple[Declaration, str]:
    """Parse a declaration file; returns the declaration and its mode (``max``/``min``)."""
    eqs: dict[Var, Formula] = {}
    mode = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _EQUATION.match(line)
        if not m:
            raise HmlError(f"line {lineno}: expected 'max X(q) = formula' or 'min X(q) = formula'")
        if mode is None:
            mode = m.group(1)
        elif mode != m.group(1):
            raise HmlError(f"line {lineno}: all equations must use the same mode ({mode})")
        v = Var(m.group(2), m.group(3))
        if v in eqs:
            raise HmlError(f"line {lineno}: second equation for {v}")
        try:
            eqs[v] = parse_formula(m.group(4))
        except FormulaSyntaxError as e:
            raise HmlError(f"line {lineno}: {e}") from None
    if mode is None:
        raise HmlError("declaration has no equations")
    return Declaration(eqs), mode


def serialize_declaration(d: Declaration, mode: str = "max", header: str | None = None) -> str:
    lines = [f"# {header}"] if header else []
    lines += [f"{mode} {v} = {print_formula(f)}" for v, f in d.equations.items()]
    return "\n".join(lines) + "\n"


# Random formulae for property tests and sampling


def random_formula(
    rng: random.Random,
    lts: Lts,
    max_depth: int,
    variables: Iterable[Var] = (),
    kinds: Iterable[str] = (FORWARD, BACKWARD, AGENT, STRICT_BOX),
) -> Formula:
    """A random formula of depth at most ``max_depth`` over ``lts``'s labels and agents.

    ``kinds`` picks the admissible modalities; ``STRICT_BOX`` enables ``[!a]``.
    And/Or nodes take 0 to 3 children so the empty conventions get exercised.
    """
    variables = list(variables)
    kinds = set(kinds)
    mods = []
    for a in lts.labels:
        if FORWARD in kinds:
            mods += [(FORWARD, a, DIAMOND), (FORWARD, a, BOX)]
        if BACKWARD in kinds:
            mods += [(BACKWARD, a, DIAMOND), (BACKWARD, a, BOX)]
        if STRICT_BOX in kinds:
            mods.append((FORWARD, a, STRICT_BOX))
    if AGENT in kinds:
        for i in lts.agents:
            mods += [(AGENT, i, DIAMOND), (AGENT, i, BOX)]
    leaves = [TT, FF] + variables

    def build(d):
        r = rng.random()
        if d == 0 or r < 0.2:
            return rng.choice(leaves)
        if r < 0.55 and mods:
            kind, name, flavor = rng.choice(mods)
            return Mod(kind, name, flavor, build(d - 1))
        node = And if r < 0.8 else Or
        return node([build(d - 1) for _ in range(rng.randint(0, 3))])

    return build(max_depth)


def resolve_state(lts: Lts, v: Var) -> int:
    try:
        return lts.state_index[v.state]
    except KeyError:
        raise LtsError(f"variable {v} names an undeclared state") from None
