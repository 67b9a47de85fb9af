"""Characteristic formulae for behavioural relations over finite LTSs.

Builds recursive Hennessy-Milner declarations whose largest solution
characterises a behavioural preorder or equivalence, solves them by Kleene
iteration, and checks the result against a direct relational fixed point.
"""

from charkit.lts import Lts, LtsError, parse_lts, random_lts, serialize_lts, validate
from charkit.semantics import MissingAnnotation, Semantics
from charkit.hml import (
    And,
    Declaration,
    FF,
    Mod,
    Or,
    TT,
    Var,
    apply_declaration,
    evaluate,
    parse_formula,
    print_formula,
    satisfies,
)
from charkit.declgen import GeneratedSystem, expresses_upto_check, gen
from charkit.solver import env_to_relation, solve_max, solve_min
from charkit.oracle import gfp, inverse, lfp, oracle_relation, sigma_of_relation, star, step

__all__ = [
    "And",
    "Declaration",
    "FF",
    "GeneratedSystem",
    "Lts",
    "LtsError",
    "MissingAnnotation",
    "Mod",
    "Or",
    "Semantics",
    "TT",
    "Var",
    "apply_declaration",
    "env_to_relation",
    "evaluate",
    "expresses_upto_check",
    "gen",
    "gfp",
    "inverse",
    "lfp",
    "oracle_relation",
    "parse_formula",
    "parse_lts",
    "print_formula",
    "random_lts",
    "satisfies",
    "serialize_lts",
    "sigma_of_relation",
    "solve_max",
    "solve_min",
    "star",
    "step",
    "validate",
]
