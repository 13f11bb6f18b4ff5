"""
separation.py
-------------
Separation deciders for Pol(C) and BPol(C) over a finite basis C, the
Straubing-Therien level dispatch, membership through separation, and
separator certificates.
"""
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, Iterable, List, Optional, Tuple, Union as TypingUnion

import numpy as np

from algebra import (
    Basis,
    CompatibleMorphism,
    Monoid,
    Morphism,
    RecognizedLanguage,
    canonical_basis_morphism,
    compatible_product,
    image,
    is_good,
    transition_monoid,
)
from automata import (
    Alphabet,
    Nfa,
    complement,
    concat,
    empty_nfa,
    includes,
    intersect,
    is_empty,
    letters_nfa,
    morphism_to_nfa,
    union,
)
import config
from errors import AlphabetMismatchError, CertificateError, ResourceLimitError
from trees import TreeContext, saturate

logger = logging.getLogger(__name__)

Language = TypingUnion[Nfa, RecognizedLanguage]
STRATEGIES = ("tm", "tag", "both")


# -------------------------------
# Levels
# -------------------------------
_ST_LEVELS = {
    "st-1/2": ("pol", "triv"),
    "st-1": ("bpol", "triv"),
    "st-3/2": ("pol", "at"),
    "st-2": ("bpol", "at"),
}


@dataclass(frozen=True)
class Level:
    op: str
    basis: Basis
    name: str

    @classmethod
    def parse(cls, text: str, basis: Optional[Basis] = None) -> "Level":
        text = text.strip().lower()
        if text in _ST_LEVELS:
            op, kind = _ST_LEVELS[text]
            if basis is not None and basis.kind != kind:
                if text not in ("st-1/2", "st-1"):
                    raise ValueError(f"level {text} has a fixed basis; use pol/bpol with --basis instead")
                return cls(op, basis, f"{op}({basis.name})")
            return cls(op, Basis(kind), text)
        if text in ("pol", "bpol"):
            b = basis or Basis("triv")
            return cls(text, b, f"{text}({b.name})")
        raise ValueError(f"unknown level {text!r} (expected st-1/2, st-1, st-3/2, st-2, pol or bpol)")

    def desugar(self) -> Tuple[str, Basis]:
        return self.op, self.basis


@dataclass
class Verdict:
    separable: bool
    witnesses: List[Tuple[int, int]] = field(default_factory=list)
    level: str = ""
    strategy: str = ""
    stats: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.separable == bool(self.witnesses):
            raise AssertionError("a verdict is separable exactly when it has no witnesses")

    def to_dict(self) -> Dict[str, Any]:
        return {
            "separable": self.separable,
            "level": self.level,
            "strategy": self.strategy,
            "witnesses": [list(w) for w in self.witnesses],
            "stats": self.stats,
        }


# -------------------------------
# Pol(C)
# -------------------------------
def pol_separates(cm: CompatibleMorphism, F0: Iterable[int], F1: Iterable[int],
                  deadline: Optional[float] = None) -> Verdict:
    F0, F1 = sorted(set(F0)), sorted(set(F1))
    S = image(cm.morphism)
    ctx = TreeContext(cm, cm, S)
    family = saturate(ctx, deadline=deadline)
    witnesses = [(s0, s1) for s0 in F0 for s1 in F1 if family.has_root_label(s0, s1)]
    stats = {"monoid": cm.monoid.size, "image": len(S), "saturation": family.stats}
    logger.info(f"pol({cm.basis.name}): {len(witnesses)} bad pairs over a monoid of size {cm.monoid.size}")
    return Verdict(not witnesses, witnesses, f"pol({cm.basis.name})", "", stats)


# -------------------------------
# BPol(C)
# -------------------------------
def _pair_morphism(cm: CompatibleMorphism, members: List[int]) -> CompatibleMorphism:
    """beta(w) = (alpha(w), alpha(w)) on image x image; an element (i, j) is stored as i * p + j."""
    p = len(members)
    if p ** 4 > config.TABLE_CELL_CAP:
        raise ResourceLimitError("pair monoid table cells", config.TABLE_CELL_CAP)
    position = np.full(cm.monoid.size, -1, dtype=np.int64)
    position[members] = np.arange(p)
    P = position[cm.monoid.mul[np.ix_(members, members)]]
    mul = (P[:, None, :, None] * p + P[None, :, None, :]).reshape(p * p, p * p)
    diag = lambda s: int(position[s]) * (p + 1)
    morphism = Morphism(cm.alphabet, Monoid(mul, diag(cm.monoid.unit)),
                        tuple(diag(x) for x in cm.morphism.letter_image))
    class_of = np.repeat(cm.class_of[members], p)
    return CompatibleMorphism(morphism, class_of, cm.basis, cm.basis_morphism)


def red(cm: CompatibleMorphism, beta: CompatibleMorphism, members: List[int], S: FrozenSet[int],
        deadline: Optional[float] = None) -> FrozenSet[int]:
    """Pairs (s, t) of S such that (s, {(t, s)}) is a root label."""
    p = len(members)
    family = saturate(TreeContext(cm, beta, S), deadline=deadline)
    kept = set()
    for x in S:
        i, j = divmod(x, p)
        if family.has_root_label(members[i], j * p + i):
            kept.add(x)
    return frozenset(kept)


def bpol_separates(cm: CompatibleMorphism, F0: Iterable[int], F1: Iterable[int],
                   deadline: Optional[float] = None) -> Verdict:
    """
    Greatest fixpoint of Red reached by downward iteration from
    image x image; separable iff it misses F0 x F1.
    """
    members = sorted(image(cm.morphism))
    p = len(members)
    beta = _pair_morphism(cm, members)
    S = frozenset(range(p * p))
    chain = [len(S)]
    while True:
        nxt = red(cm, beta, members, S, deadline)
        if not nxt <= S:
            raise AssertionError("Red produced pairs outside its argument")
        if nxt == S:
            break
        if not is_good(nxt, beta.morphism):
            raise AssertionError(f"Red iteration {len(chain)} lost goodness")
        S = nxt
        chain.append(len(S))
        logger.debug(f"Red iteration {len(chain) - 1}: {len(S)} pairs left")
    if len(chain) - 1 > p * p:
        raise AssertionError("Red chain longer than the number of pairs")

    position = {s: i for i, s in enumerate(members)}
    witnesses = []
    for s0 in sorted(set(F0)):
        for s1 in sorted(set(F1)):
            if s0 in position and s1 in position and position[s0] * p + position[s1] in S:
                witnesses.append((s0, s1))
    stats = {"monoid": cm.monoid.size, "image": p, "pair_monoid": p * p,
             "red_chain": chain, "red_iterations": len(chain) - 1, "fixpoint_size": len(S)}
    logger.info(f"bpol({cm.basis.name}): Red chain {chain}, {len(witnesses)} bad pairs")
    return Verdict(not witnesses, witnesses, f"bpol({cm.basis.name})", "", stats)


def decide(op: str, cm: CompatibleMorphism, F0, F1, deadline: Optional[float] = None) -> Verdict:
    if op == "pol":
        return pol_separates(cm, F0, F1, deadline)
    if op == "bpol":
        return bpol_separates(cm, F0, F1, deadline)
    raise ValueError(f"unknown closure {op!r}")


# -------------------------------
# Dispatch
# -------------------------------
def _as_recognized(lang: Language, deadline: Optional[float]) -> RecognizedLanguage:
    if isinstance(lang, RecognizedLanguage):
        return lang
    return transition_monoid(lang, None, deadline)


def _alphabet_of(lang: Language) -> Alphabet:
    return lang.morphism.alphabet if isinstance(lang, RecognizedLanguage) else lang.alphabet


def _via_transition_monoids(level: Level, in1: Language, in2: Language, deadline) -> Verdict:
    l1, l2 = _as_recognized(in1, deadline), _as_recognized(in2, deadline)
    cm, F0, F1 = compatible_product(l1, l2, level.basis, deadline=deadline)
    return decide(level.op, cm, F0, F1, deadline)


def _via_tagging(level: Level, n1: Nfa, n2: Nfa, deadline) -> Verdict:
    from reduction import reduce_instance

    cm, F0, F1 = reduce_instance(n1, n2, level, deadline=deadline)
    verdict = decide(level.op, cm, F0, F1, deadline)
    # witnesses live in the reduced monoid; report the verdict only
    if verdict.witnesses:
        verdict.stats["reduced_witnesses"] = len(verdict.witnesses)
    return verdict


def st_separates(level: Level, in1: Language, in2: Language, strategy: str = "tm",
                 deadline: Optional[float] = None) -> Verdict:
    """
    Is L(in1) separable from L(in2) by a language of the given level?
    Automata go through transition monoids ("tm") or the tagging reduction
    ("tag"); "both" runs the two concurrently and checks they agree.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if not _alphabet_of(in1).same_letters(_alphabet_of(in2)):
        raise AlphabetMismatchError("both inputs must be over the same alphabet")
    started = time.monotonic()
    if isinstance(in1, RecognizedLanguage) or isinstance(in2, RecognizedLanguage):
        verdict = _via_transition_monoids(level, in1, in2, deadline)
        used = "direct"
    elif strategy == "tm":
        verdict = _via_transition_monoids(level, in1, in2, deadline)
        used = "tm"
    elif strategy == "tag":
        verdict = _via_tagging(level, in1, in2, deadline)
        used = "tag"
    else:
        with ThreadPoolExecutor(max_workers=2) as pool:
            tm = pool.submit(_via_transition_monoids, level, in1, in2, deadline)
            tag = pool.submit(_via_tagging, level, in1, in2, deadline)
            verdict, other = tm.result(), tag.result()
        if verdict.separable != other.separable:
            raise AssertionError(f"strategies disagree at {level.name}: tm={verdict.separable} tag={other.separable}")
        verdict.stats["tag"] = other.stats
        used = "both"
    verdict.level = level.name
    verdict.strategy = used
    logger.info(f"{level.name} [{used}]: {'separable' if verdict.separable else 'inseparable'} "
                f"in {time.monotonic() - started:.2f}s")
    return verdict


def is_member(level: Level, language: Language, deadline: Optional[float] = None) -> Verdict:
    """A language belongs to the class iff it is separable from its complement."""
    rl = _as_recognized(language, deadline)
    cm, F0, _ = compatible_product(rl, rl, level.basis, deadline=deadline)
    F1 = frozenset(range(cm.monoid.size)) - F0
    verdict = decide(level.op, cm, F0, F1, deadline)
    verdict.level = level.name
    verdict.strategy = "member"
    return verdict


# -------------------------------
# Certificates
# -------------------------------
@dataclass(frozen=True)
class PolTerm:
    """Union of marked products block_0 a_1 block_1 ... a_n block_n."""
    products: Tuple[Tuple, ...] = ()


@dataclass(frozen=True)
class Not:
    arg: Any


@dataclass(frozen=True)
class And:
    args: Tuple = ()


@dataclass(frozen=True)
class Or:
    args: Tuple = ()


@dataclass(frozen=True)
class Certificate:
    level: Level
    alphabet: Alphabet
    body: Any

    def validate(self):
        bm = canonical_basis_morphism(self.level.basis, self.alphabet)
        if self.level.op == "pol" and not isinstance(self.body, PolTerm):
            raise CertificateError("a pol certificate is a union of marked products")

        def check(node):
            if isinstance(node, PolTerm):
                for product in node.products:
                    if len(product) % 2 != 1:
                        raise CertificateError("a product alternates blocks and letters, starting and ending with a block")
                    for k, part in enumerate(product):
                        if k % 2:
                            if part not in self.alphabet:
                                raise CertificateError(f"letter {part!r} is not in the alphabet")
                        elif any(not 0 <= c < bm.target.size for c in part):
                            raise CertificateError(f"block {sorted(part)} names an unknown basis class")
            elif isinstance(node, Not):
                check(node.arg)
            elif isinstance(node, (And, Or)):
                if not node.args:
                    raise CertificateError(f"{type(node).__name__.lower()} needs at least one argument")
                for arg in node.args:
                    check(arg)
            else:
                raise CertificateError(f"unknown certificate node {node!r}")

        check(self.body)
        return bm


def certificate_to_nfa(c: Certificate, cap: Optional[int] = None) -> Nfa:
    bm = c.validate()
    blocks: Dict[FrozenSet[int], Nfa] = {}

    def block(classes) -> Nfa:
        key = frozenset(classes)
        if key not in blocks:
            blocks[key] = morphism_to_nfa(RecognizedLanguage(bm, key))
        return blocks[key]

    def build(node) -> Nfa:
        if isinstance(node, PolTerm):
            parts = []
            for product in node.products:
                pieces = [block(part) if k % 2 == 0 else letters_nfa(c.alphabet, [part])
                          for k, part in enumerate(product)]
                parts.append(concat(*pieces))
            return union(*parts) if parts else empty_nfa(c.alphabet)
        if isinstance(node, Not):
            return complement(build(node.arg), cap)
        if isinstance(node, And):
            out = build(node.args[0])
            for arg in node.args[1:]:
                out = intersect(out, build(arg))
            return out
        if isinstance(node, Or):
            return union(*[build(arg) for arg in node.args])

    return build(c.body)


def verify_certificate(c: Certificate, n1: Nfa, n2: Nfa, cap: Optional[int] = None,
                       deadline: Optional[float] = None) -> bool:
    """True iff the certificate's language contains L(n1) and misses L(n2)."""
    for n in (n1, n2):
        if not n.alphabet.same_letters(c.alphabet):
            raise AlphabetMismatchError("certificate and automata must share their alphabet")
    K = certificate_to_nfa(c, cap)
    return includes(K, n1, cap, deadline) and is_empty(intersect(K, n2))
