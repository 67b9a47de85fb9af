import random

import pytest
from hypothesis import given, settings, strategies as st

from charkit.declgen import gen
from charkit.hml import (
    AGENT,
    BACKWARD,
    FF,
    FORWARD,
    STRICT_BOX,
    TT,
    And,
    Declaration,
    FormulaSyntaxError,
    HmlError,
    Mod,
    Or,
    Var,
    agent_box,
    agent_dia,
    apply_declaration,
    back_box,
    back_dia,
    bottom_env,
    box,
    depth,
    dia,
    env_leq,
    evaluate,
    normalize,
    parse_declaration,
    parse_formula,
    print_formula,
    random_formula,
    satisfies,
    serialize_declaration,
    strict_box,
    top_env,
)
from charkit.lts import Lts, random_lts

from conftest import ALL_ANNOTATIONS, random_instances


@pytest.fixture
def small():
    # p -a-> q, r -a-> q, d deadlocked and diverging
    return Lts.build(
        ["p", "q", "r", "d"],
        ["a", "b"],
        [("p", "a", "q"), ("r", "a", "q"), ("q", "b", "r")],
        diverging=["d"],
        agents={"i": [("p", "r"), ("r", "p")]},
    )


def states(lts, mask):
    return set(lts.names(mask))


def test_eval_examples(small):
    assert "d" in states(small, evaluate(box("a", FF), small, {}))
    sat = states(small, evaluate(dia("a", TT), small, {}))
    assert "p" in sat and "d" not in sat
    assert "d" not in states(small, evaluate(strict_box("a", TT), small, {}))
    assert "q" in states(small, evaluate(back_dia("a", TT), small, {}))


def test_eval_all_node_kinds(small):
    env = {Var("X", "q"): 0b0010}
    assert evaluate(TT, small, env) == 0b1111
    assert evaluate(FF, small, env) == 0
    assert evaluate(And([]), small, env) == 0b1111
    assert evaluate(Or([]), small, env) == 0
    assert states(small, evaluate(dia("a", Var("X", "q")), small, env)) == {"p", "r"}
    assert states(small, evaluate(back_box("a", FF), small, env)) == {"p", "r", "d"}
    assert states(small, evaluate(agent_dia("i", dia("a", TT)), small, env)) == {"p", "r"}
    assert states(small, evaluate(agent_box("i", dia("b", TT)), small, env)) == {"q"}
    # strict box: vacuous for the converging deadlock-free states with no a-move
    assert states(small, evaluate(strict_box("a", Var("X", "q")), small, env)) == {"p", "q", "r"}


def test_eval_errors(small):
    with pytest.raises(HmlError, match="undeclared label"):
        evaluate(dia("z", TT), small, {})
    with pytest.raises(HmlError, match="undeclared agent"):
        evaluate(agent_box("nobody", TT), small, {})
    with pytest.raises(HmlError, match="unbound variable"):
        evaluate(Var("X", "p"), small, {})


def test_strict_box_only_forward():
    with pytest.raises(HmlError):
        Mod(BACKWARD, "a", STRICT_BOX, TT)
    with pytest.raises(HmlError):
        Mod(AGENT, "i", STRICT_BOX, TT)


def test_satisfies_examples(small):
    assert satisfies(small, {}, "p", TT)
    assert not satisfies(small, {Var("X", "p"): 0}, "p", Var("X", "p"))


def test_satisfies_matches_eval_membership():
    rng = random.Random(5)
    for lts in random_instances(40, seed=2, **ALL_ANNOTATIONS):
        variables = [Var("X", q) for q in lts.states]
        env = {v: rng.getrandbits(len(lts.states)) for v in variables}
        for _ in range(10):
            f = random_formula(rng, lts, 5, variables)
            sat = evaluate(f, lts, env)
            for p in range(len(lts.states)):
                assert satisfies(lts, env, p, f) == bool(sat >> p & 1)


def test_apply_declaration_examples():
    lts = Lts.build(["p", "p'"], ["a"], [("p", "a", "p'")])
    xs = [Var("X", q) for q in lts.states]
    const = Declaration({v: TT for v in xs})
    assert apply_declaration(const, lts, bottom_env(const, lts)) == top_env(const, lts)

    ident = Declaration({v: v for v in xs})
    env = {xs[0]: 0b10, xs[1]: 0b01}
    assert apply_declaration(ident, lts, env) == env

    # X(p) = [a]X(p') /\ <a>X(p') and X(p') = [a]ff /\ tt, evaluated by hand at the top
    bisim = gen("bisim", lts).declaration
    out = apply_declaration(bisim, lts, top_env(bisim, lts))
    assert out[Var("X", "p")] == 0b01
    assert out[Var("X", "p'")] == 0b10


def test_apply_declaration_domain_mismatch():
    lts = Lts.build(["p"], ["a"])
    d = Declaration({Var("X", "p"): TT})
    with pytest.raises(HmlError):
        apply_declaration(d, lts, {})


def test_env_leq_examples():
    X, Y = Var("X", "p"), Var("X", "q")
    bottom = {X: 0, Y: 0}
    top = {X: 0b11, Y: 0b11}
    assert env_leq(bottom, {X: 0b10, Y: 0b01})
    assert env_leq({X: 0b10, Y: 0b01}, top)
    assert not env_leq({X: 0b01}, {X: 0b10})
    with pytest.raises(HmlError):
        env_leq({X: 0}, {Y: 0})


def test_box_ff_means_refusal():
    for lts in random_instances(50, seed=3):
        for i, a in enumerate(lts.labels):
            sat = evaluate(box(a, FF), lts, {})
            for p in range(len(lts.states)):
                assert bool(sat >> p & 1) == (lts.succ_masks[p][i] == 0)


def test_singleton_and_or_are_transparent():
    rng = random.Random(8)
    for lts in random_instances(30, seed=4, **ALL_ANNOTATIONS):
        for _ in range(5):
            f = random_formula(rng, lts, 4)
            assert evaluate(And([f]), lts, {}) == evaluate(f, lts, {})
            assert evaluate(Or([f]), lts, {}) == evaluate(f, lts, {})


@settings(max_examples=200, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 6), k=st.integers(1, 3))
def test_eval_is_monotone(seed, n, k):
    lts = random_lts(n, k, 0.35, seed, **ALL_ANNOTATIONS)
    rng = random.Random(seed)
    variables = [Var(ns, q) for ns in "XY" for q in lts.states]
    big = {v: rng.getrandbits(n) for v in variables}
    small = {v: m & rng.getrandbits(n) for v, m in big.items()}
    f = random_formula(rng, lts, 6, variables)
    lo, hi = evaluate(f, lts, small), evaluate(f, lts, big)
    assert lo & ~hi == 0


def test_apply_declaration_is_monotone():
    rng = random.Random(9)
    for lts in random_instances(60, seed=5, **ALL_ANNOTATIONS):
        for tag in ("bisim", "bfbid", "prebis", "extgeq", "simeq"):
            d = gen(tag, lts).declaration
            big = {v: rng.getrandbits(len(lts.states)) for v in d}
            small = {v: m & rng.getrandbits(len(lts.states)) for v, m in big.items()}
            assert env_leq(apply_declaration(d, lts, small), apply_declaration(d, lts, big))


def test_parse_examples():
    assert parse_formula("tt") is TT
    f = parse_formula(r"[a](X(q1) \/ X(q2)) /\ <a>X(q1)")
    assert f == And([box("a", Or([Var("X", "q1"), Var("X", "q2")])), dia("a", Var("X", "q1"))])
    assert parse_formula("<~a>tt") == back_dia("a", TT)


def test_parse_all_modalities():
    f = parse_formula(r"[~a]ff \/ <i:alice>Y(s0) \/ [i:bob]tt /\ [!b]X(s1)")
    assert f == Or([
        back_box("a", FF),
        agent_dia("alice", Var("Y", "s0")),
        And([agent_box("bob", TT), strict_box("b", Var("X", "s1"))]),
    ])


def test_parse_precedence_and_nesting():
    assert parse_formula(r"<a>tt /\ ff \/ tt") == Or([And([dia("a", TT), FF]), TT])
    nested = parse_formula(r"(tt /\ ff) /\ tt")
    assert nested == And([And([TT, FF]), TT])
    assert print_formula(nested) == r"(tt /\ ff) /\ tt"


def test_parse_errors_carry_position():
    with pytest.raises(FormulaSyntaxError) as exc:
        parse_formula(r"tt /\ ")
    assert exc.value.pos == 6
    with pytest.raises(FormulaSyntaxError, match="modality"):
        parse_formula("<a b>tt")
    with pytest.raises(FormulaSyntaxError, match="strict"):
        parse_formula("<!a>tt")
    with pytest.raises(FormulaSyntaxError, match="trailing"):
        parse_formula("tt tt")
    with pytest.raises(FormulaSyntaxError):
        parse_formula("(tt")


def test_print_parse_round_trip():
    rng = random.Random(10)
    for lts in random_instances(80, seed=6, **ALL_ANNOTATIONS):
        variables = [Var("X", q) for q in lts.states] + [Var("Y", lts.states[0])]
        for _ in range(10):
            f = normalize(random_formula(rng, lts, 6, variables))
            text = print_formula(f)
            assert parse_formula(text) == f
            assert print_formula(parse_formula(text)) == text


def test_random_formula_respects_depth_and_kinds():
    rng = random.Random(11)
    lts = random_lts(4, 2, 0.5, 1, **ALL_ANNOTATIONS)
    for _ in range(200):
        f = random_formula(rng, lts, 6, kinds=(FORWARD,))
        assert depth(f) <= 6
        assert "~" not in print_formula(f) and "!" not in print_formula(f)


def test_declaration_file_round_trip():
    lts = random_lts(5, 2, 0.4, 3, **ALL_ANNOTATIONS)
    for tag in ("simeq", "bfbid", "prebis", "extgeq"):
        d = gen(tag, lts).declaration
        text = serialize_declaration(d, "max", header="test")
        again, mode = parse_declaration(text)
        assert mode == "max"
        assert again == Declaration({v: normalize(f) for v, f in d.equations.items()})
        assert serialize_declaration(again, "max", header="test") == text


def test_declaration_file_errors():
    with pytest.raises(HmlError, match="same mode"):
        parse_declaration("max X(p) = tt\nmin X(q) = tt\n")
    with pytest.raises(HmlError, match="second equation"):
        parse_declaration("max X(p) = tt\nmax X(p) = ff\n")
    with pytest.raises(HmlError, match="line 2"):
        parse_declaration("max X(p) = tt\nmax X(q) = <a\n")
    with pytest.raises(HmlError, match="no equations"):
        parse_declaration("# nothing\n")


def test_declaration_check():
    lts = Lts.build(["p", "q"], ["a"])
    with pytest.raises(HmlError, match="free variables"):
        Declaration({Var("X", "p"): Var("X", "q")}).check(lts)
    with pytest.raises(HmlError, match="no equation for X\\(q\\)"):
        Declaration({Var("X", "p"): TT}).check(lts)
    Declaration({Var("X", "p"): TT}).check(lts, total=False)
