from __future__ import annotations

from enum import Enum

from charkit.lts import Lts, preorder_violations


class MissingAnnotation(ValueError):
    """The LTS lacks an annotation the requested semantics depends on."""


class Semantics(str, Enum):
    """Behavioural relations with a characteristic-declaration construction.

    Orientation of ``(p, q)`` in the computed relation:

    ========  =====================================================
    simleq    p is simulated by q
    simgeq    p simulates q
    simeq     p and q simulate each other
    bisim     strong bisimilarity
    readysim  q ready-simulates p; read as ``p`` above ``q``
    bfb       back-and-forth bisimilarity (several possible pasts)
    bfbid     bfb plus per-agent indistinguishability
    prebis    prebisimulation, ``p`` above ``q``
    extleq    p is extended-simulated by q (label preorder)
    extgeq    inverse of extleq
    ========  =====================================================
    """

    SIM_LEQ = "simleq"
    SIM_GEQ = "simgeq"
    SIM_EQ = "simeq"
    BISIM = "bisim"
    READY_SIM = "readysim"
    BFB = "bfb"
    BFBID = "bfbid"
    PREBIS = "prebis"
    EXT_LEQ = "extleq"
    EXT_GEQ = "extgeq"

    @classmethod
    def parse(cls, tag: str) -> "Semantics":
        tag = tag.strip().lower()
        tag = ALIASES.get(tag, tag)
        try:
            return cls(tag)
        except ValueError:
            known = ", ".join(s.value for s in cls)
            raise ValueError(f"unknown semantics {tag!r} (expected one of {known})") from None

    @property
    def uses_preorder(self) -> bool:
        return self in (Semantics.EXT_LEQ, Semantics.EXT_GEQ)


ALIASES = {
    "rs": "readysim",
    "ready": "readysim",
    "sim": "simleq",
    "ext": "extleq",
    "prbis": "prebis",
}


def check_annotations(sem: Semantics, lts: Lts) -> None:
    """Raise MissingAnnotation if ``lts`` cannot support ``sem``."""
    if sem.uses_preorder:
        if not lts.label_preorder and lts.labels:
            raise MissingAnnotation(f"{sem.value} needs a label preorder (labelle: section)")
        problems = preorder_violations(lts, extended=True)
        if problems:
            raise MissingAnnotation(f"{sem.value}: invalid label preorder: " + "; ".join(problems))
