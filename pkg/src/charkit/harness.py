"""Randomized differential testing: solver route against oracle route."""

from __future__ import annotations

import json
import random
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

from charkit import oracle
from charkit.declgen import GeneratedSystem, gen
from charkit.lts import Lts, random_lts, serialize_lts
from charkit.semantics import Semantics
from charkit.solver import solve_max

DEFAULT_DENSITIES = (0.1, 0.3, 0.7)


@dataclass(frozen=True)
class Mismatch:
    seed: int
    semantics: str
    lts: str
    pair: tuple[str, str]
    formula_verdict: bool
    oracle_verdict: bool


@dataclass
class DiffReport:
    trials: int = 0
    mismatches: list[Mismatch] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    def to_text(self) -> str:
        lines = [f"trials: {self.trials}", f"mismatches: {len(self.mismatches)}"]
        for m in self.mismatches:
            p, q = m.pair
            lines.append(
                f"MISMATCH seed={m.seed} semantics={m.semantics} pair=({p}, {q}) "
                f"formula={m.formula_verdict} oracle={m.oracle_verdict}"
            )
            lines += ["  " + ln for ln in m.lts.splitlines()]
        return "\n".join(lines) + "\n"

    def to_json_lines(self) -> str:
        lines = [json.dumps(asdict(m), sort_keys=True) for m in self.mismatches]
        lines.append(json.dumps({"trials": self.trials, "mismatches": len(self.mismatches)}))
        return "\n".join(lines) + "\n"


Generator = Callable[[Semantics, Lts], GeneratedSystem]


def formula_relation(sem, lts: Lts, generator: Generator = gen) -> oracle.Relation:
    system = generator(Semantics(sem), lts)
    env, _ = solve_max(system.declaration, lts)
    return system.relation(env, lts)


def trial_lts(
    trial_seed: int,
    max_states: int,
    max_labels: int,
    density: float,
    *,
    num_states: int | None = None,
    diverge_prob: float = 0.3,
    max_agents: int = 2,
) -> Lts:
    """The instance a trial seed denotes; every annotation is switched on."""
    r = random.Random(trial_seed)
    n = r.randint(1, max_states)
    k = r.randint(1, max_labels)
    return random_lts(
        num_states or n,
        k,
        density,
        trial_seed,
        diverge=True,
        preorder=True,
        agents=True,
        diverge_prob=diverge_prob,
        max_agents=max_agents,
    )


def _compare(sem, lts, seed, generator) -> list[Mismatch]:
    got = formula_relation(sem, lts, generator)
    want = oracle.oracle_relation(sem, lts)
    text = serialize_lts(lts)
    out = []
    for p, q in sorted(got ^ want):
        names = (lts.states[p], lts.states[q])
        out.append(Mismatch(seed, sem.value, text, names, (p, q) in got, (p, q) in want))
    return out


def difftest(
    semantics: Iterable = tuple(Semantics),
    trials: int = 100,
    max_states: int = 8,
    max_labels: int = 3,
    densities: Sequence[float] = DEFAULT_DENSITIES,
    seed: int = 0,
    *,
    generator: Generator = gen,
    shrink: bool = True,
    diverge_prob: float = 0.3,
    max_agents: int = 2,
) -> DiffReport:
    """Compare both routes on ``trials`` random LTSs for every listed semantics.

    Trial ``t`` uses seed ``seed + t`` and density ``densities[t % len]``.  On a
    mismatch, smaller state counts are retried with the same seed and the
    smallest failing instance is reported.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    sems = [Semantics(s) for s in semantics]
    report = DiffReport(trials=trials)
    for t in range(trials):
        trial_seed = seed + t
        density = densities[t % len(densities)]
        opts = dict(diverge_prob=diverge_prob, max_agents=max_agents)
        lts = trial_lts(trial_seed, max_states, max_labels, density, **opts)
        for sem in sems:
            found = _compare(sem, lts, trial_seed, generator)
            if found and shrink:
                for n in range(1, len(lts.states)):
                    small = trial_lts(trial_seed, max_states, max_labels, density, num_states=n, **opts)
                    smaller = _compare(sem, small, trial_seed, generator)
                    if smaller:
                        found = smaller
                        break
            report.mismatches.extend(found)
    report.mismatches.sort(key=lambda m: (m.seed, m.semantics, m.pair))
    return report
