"""
hardness.py
-----------
Generators for the hardness constructions:

- quantified Boolean formulas (QDIMACS in/out, brute-force evaluation),
- the pair of languages (L, L') built from a formula, which is inseparable at
  level 3/2 exactly when the formula is true,
- the transform of a pair (H, H') into a pair that is separable at level 2
  exactly when (H, H') is separable at level 3/2.

Variables use the innermost-first numbering: x_1 is the innermost variable.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, FrozenSet, List, Optional, Sequence, Tuple

from automata import (
    Alphabet,
    Letter,
    Nfa,
    concat,
    epsilon_nfa,
    intersect,
    is_empty,
    letters_nfa,
    star,
    union,
    with_alphabet,
)
from errors import QdimacsFormatError, ResourceLimitError, SeparationError, deadline_after

logger = logging.getLogger(__name__)

EXISTS, FORALL = "e", "a"
EVAL_MAX_VARS = 20


@dataclass(frozen=True)
class Qbf:
    var_count: int
    quantifiers: Tuple[str, ...]
    clauses: Tuple[FrozenSet[int], ...]
    source_ids: Tuple[int, ...] = field(default=(), compare=False)

    def __post_init__(self):
        if len(self.quantifiers) != self.var_count:
            raise QdimacsFormatError("every variable needs exactly one quantifier")
        if any(q not in (EXISTS, FORALL) for q in self.quantifiers):
            raise QdimacsFormatError("quantifiers are 'e' or 'a'")
        for clause in self.clauses:
            if not clause:
                raise QdimacsFormatError("empty clause")
            if any(lit == 0 or abs(lit) > self.var_count for lit in clause):
                raise QdimacsFormatError(f"clause {sorted(clause)} uses an undeclared variable")

    def describe(self) -> str:
        prefix = " ".join(f"{'E' if self.quantifiers[i - 1] == EXISTS else 'A'}x{i}"
                          for i in range(self.var_count, 0, -1))
        matrix = " & ".join("(" + " | ".join(f"{'-' if l < 0 else ''}x{abs(l)}" for l in sorted(c, key=abs)) + ")"
                            for c in self.clauses)
        return f"{prefix} {matrix}".strip()


# -------------------------------
# QDIMACS
# -------------------------------
def parse_qdimacs(text: str) -> Qbf:
    header = None
    blocks: List[Tuple[str, List[int]]] = []
    clauses: List[FrozenSet[int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        tokens = line.split()
        if tokens[0] == "p":
            if header is not None:
                raise QdimacsFormatError("duplicate problem line", lineno)
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise QdimacsFormatError("expected 'p cnf <vars> <clauses>'", lineno)
            try:
                header = (int(tokens[2]), int(tokens[3]))
            except ValueError:
                raise QdimacsFormatError("non-numeric problem line", lineno)
            continue
        if header is None:
            raise QdimacsFormatError("missing problem line", lineno)
        try:
            numbers = [int(t) for t in tokens[1:]] if tokens[0] in (EXISTS, FORALL) else [int(t) for t in tokens]
        except ValueError:
            raise QdimacsFormatError(f"unexpected token in {line!r}", lineno)
        if not numbers or numbers[-1] != 0 or 0 in numbers[:-1]:
            raise QdimacsFormatError("lines must end with a single 0", lineno)
        if tokens[0] in (EXISTS, FORALL):
            if clauses:
                raise QdimacsFormatError("quantifier after clauses (not prenex)", lineno)
            if any(v <= 0 or v > header[0] for v in numbers[:-1]):
                raise QdimacsFormatError("quantified variable out of range", lineno)
            blocks.append((tokens[0], numbers[:-1]))
        else:
            if any(abs(v) > header[0] for v in numbers[:-1]):
                raise QdimacsFormatError("literal out of range", lineno)
            clauses.append(frozenset(numbers[:-1]))
    if header is None:
        raise QdimacsFormatError("missing problem line")
    n, m = header
    if len(clauses) != m:
        raise QdimacsFormatError(f"problem line announces {m} clauses, found {len(clauses)}")

    outer_first = [(q, v) for q, vs in blocks for v in vs]
    seen = [v for _, v in outer_first]
    if len(set(seen)) != len(seen):
        raise QdimacsFormatError("variable quantified twice")
    free = sorted(set(range(1, n + 1)) - set(seen))
    if free:
        raise QdimacsFormatError(f"free variables {free}")
    # outermost variable gets index n, innermost gets 1
    index_of = {v: n - j for j, (_, v) in enumerate(outer_first)}
    quantifiers = tuple(q for q, _ in reversed(outer_first))
    mapped = tuple(frozenset((1 if lit > 0 else -1) * index_of[abs(lit)] for lit in c) for c in clauses)
    source_ids = tuple(v for _, v in reversed(outer_first))
    return Qbf(n, quantifiers, mapped, source_ids)


def print_qdimacs(q: Qbf) -> str:
    """Variables are renumbered 1..n outermost first."""
    n = q.var_count
    lines = [f"p cnf {n} {len(q.clauses)}"]
    current, block = None, []
    for i in range(n, 0, -1):
        quant = q.quantifiers[i - 1]
        if quant != current and block:
            lines.append(f"{current} {' '.join(map(str, block))} 0")
            block = []
        current = quant
        block.append(n - i + 1)
    if block:
        lines.append(f"{current} {' '.join(map(str, block))} 0")
    for clause in q.clauses:
        lits = sorted(((1 if l > 0 else -1) * (n - abs(l) + 1) for l in clause), key=lambda x: (abs(x), x))
        lines.append(" ".join(map(str, lits)) + " 0")
    return "\n".join(lines) + "\n"


def eval_qbf(q: Qbf) -> bool:
    if q.var_count > EVAL_MAX_VARS:
        raise ValueError(f"brute force evaluation is limited to {EVAL_MAX_VARS} variables")
    value = [False] * (q.var_count + 1)

    def matrix() -> bool:
        return all(any(value[abs(l)] == (l > 0) for l in c) for c in q.clauses)

    def expand(i: int) -> bool:
        if i == 0:
            return matrix()
        for b in (False, True):
            value[i] = b
            r = expand(i - 1)
            if q.quantifiers[i - 1] == EXISTS and r:
                return True
            if q.quantifiers[i - 1] == FORALL and not r:
                return False
        return q.quantifiers[i - 1] == FORALL

    return expand(q.var_count)


# -------------------------------
# Formula languages
# -------------------------------
def pos(i: int) -> Letter:
    return f"x{i}"


def neg(i: int) -> Letter:
    return f"nx{i}"


def hash_letter(i: int) -> Letter:
    return f"h{i}"


DOLLAR = "dollar"


def pretty_letter(a: Letter) -> str:
    if a == DOLLAR:
        return "$"
    if a.startswith("nx"):
        return f"x̄_{a[2:]}"
    if a.startswith("x"):
        return f"x_{a[1:]}"
    if a.startswith("h"):
        return f"#_{a[1:]}"
    return a


def qbf_alphabet(n: int) -> Alphabet:
    letters = [pos(i) for i in range(1, n + 1)] + [neg(i) for i in range(1, n + 1)]
    letters += [hash_letter(i) for i in range(1, n + 1)] + [DOLLAR]
    return Alphabet(tuple(letters))


def sub_alphabet(n: int, i: int) -> List[Letter]:
    """B_i inside B_n."""
    letters = [pos(j) for j in range(1, n + 1)] + [neg(j) for j in range(1, n + 1)]
    if i >= 1:
        letters += [hash_letter(j) for j in range(1, i + 1)] + [DOLLAR]
    return letters


# (automaton, state bound) pairs; each bound follows the combinator it wraps
Sized = Tuple[Nfa, int]


def _sym(alphabet: Alphabet, letters: Sequence[Letter]) -> Sized:
    return letters_nfa(alphabet, letters), 2


def _cat(*parts: Sized) -> Sized:
    return concat(*[p[0] for p in parts]), 1 + sum(p[1] + 2 for p in parts)


def _star(part: Sized) -> Sized:
    return star(part[0]), part[1] + 3


def _alt(*parts: Sized) -> Sized:
    return union(*[p[0] for p in parts]), sum(p[1] for p in parts)


@dataclass
class QbfInstance:
    alphabet: Alphabet
    L: Nfa
    Lprime: Nfa
    manifest: Dict[str, Any] = field(default_factory=dict)


def build_qbf_languages(q: Qbf) -> QbfInstance:
    n = q.var_count
    B = qbf_alphabet(n)
    sym = lambda *letters: _sym(B, letters)

    L: Sized = _star(_sym(B, sub_alphabet(n, 0)))
    if q.clauses:
        Lp: Sized = _cat(*[_sym(B, sorted(pos(l) if l > 0 else neg(-l) for l in c)) for c in q.clauses])
    else:
        Lp = (epsilon_nfa(B), 1)  # empty conjunction
    levels = [{"i": 0, "L_states": L[0].state_count, "Lprime_states": Lp[0].state_count,
               "L_bound": L[1], "Lprime_bound": Lp[1]}]

    for i in range(1, n + 1):
        h, x, nx = hash_letter(i), pos(i), neg(i)
        previous = sub_alphabet(n, i - 1)
        either = sym(x, nx)

        def core(inner: Sized) -> Sized:
            return _star(_cat(sym(h), either, inner, sym(DOLLAR), either))

        T = _star(_cat(sym(h), sym(x), _star(_sym(B, [a for a in previous if a != nx])), sym(DOLLAR), sym(x)))
        Tbar = _star(_cat(sym(h), sym(nx), _star(_sym(B, [a for a in previous if a != x])), sym(DOLLAR), sym(nx)))
        new_L = _cat(core(L), sym(h))
        if q.quantifiers[i - 1] == EXISTS:
            new_Lp = _cat(core(Lp), sym(h), sym(DOLLAR), _alt(_cat(T, sym(h)), _cat(Tbar, sym(h))))
        else:
            new_Lp = _cat(Tbar, sym(h), sym(DOLLAR), core(Lp), sym(h), sym(DOLLAR), T, sym(h))
        L, Lp = new_L, new_Lp
        for (nfa, bound) in (L, Lp):
            assert nfa.state_count <= bound, f"level {i}: {nfa.state_count} states exceed the bound {bound}"
        levels.append({"i": i, "quantifier": q.quantifiers[i - 1],
                       "L_states": L[0].state_count, "Lprime_states": Lp[0].state_count,
                       "L_bound": L[1], "Lprime_bound": Lp[1]})

    manifest = {
        "formula": q.describe(),
        "alphabet": list(B),
        "pretty_alphabet": [pretty_letter(a) for a in B],
        "index_mapping": {f"x{i}": (q.source_ids[i - 1] if q.source_ids else i) for i in range(1, n + 1)},
        "levels": levels,
    }
    return QbfInstance(B, L[0], Lp[0], manifest)


def check_qbf_reduction(q: Qbf, budget: Optional[float] = None, strategy: str = "tm") -> Dict[str, Any]:
    """
    PASS when the formula is true exactly when the generated pair is not
    separable at level 3/2; SKIPPED when the budget runs out.
    """
    from separation import Level, st_separates

    started = time.monotonic()
    truth = eval_qbf(q)
    instance = build_qbf_languages(q)
    report: Dict[str, Any] = {"formula": q.describe(), "truth": truth}
    try:
        verdict = st_separates(Level.parse("st-3/2"), instance.L, instance.Lprime, strategy,
                               deadline=deadline_after(budget))
    except ResourceLimitError as e:
        report.update(status="SKIPPED", reason=str(e), seconds=round(time.monotonic() - started, 3))
        logger.warning(f"qbf check skipped for {q.describe()}: {e}")
        return report
    if verdict.separable and not is_empty(intersect(instance.L, instance.Lprime)):
        raise AssertionError("separable verdict on intersecting languages")
    report.update(
        status="PASS" if truth == (not verdict.separable) else "FAIL",
        separable=verdict.separable,
        seconds=round(time.monotonic() - started, 3),
    )
    logger.info(f"qbf check {report['status']}: {q.describe()} truth={truth} separable={verdict.separable}")
    return report


# -------------------------------
# Level 3/2 to level 2
# -------------------------------
def _fresh(alphabet: Alphabet, wanted: Letter) -> Letter:
    token = wanted
    while token in alphabet:
        token += "_"
    if token != wanted:
        logger.warning(f"letter {wanted!r} already in the alphabet, using {token!r}")
    return token


def build_bpolred_instance(h: Nfa, hp: Nfa) -> Tuple[Nfa, Nfa]:
    """
    L = #(H'#(A*$#)*)* H #(A*$#)* and L' = #(H'#(A*$#)*)* over A + {#, $}.
    """
    if not h.alphabet.same_letters(hp.alphabet):
        raise SeparationError("H and H' must be over the same alphabet")
    A = h.alphabet
    sharp = _fresh(A, "#")
    dollar = _fresh(A.extended([sharp]), "$")
    B = A.extended([sharp, dollar])
    H, Hp = with_alphabet(h, B), with_alphabet(hp, B)
    sh = letters_nfa(B, [sharp])
    block = star(concat(star(letters_nfa(B, list(A))), letters_nfa(B, [dollar]), sh))
    prefix = concat(sh, star(concat(Hp, sh, block)))
    return concat(prefix, H, sh, block), prefix
