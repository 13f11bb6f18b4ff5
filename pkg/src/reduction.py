"""
reduction.py
------------
From automata to monoids through taggings.

A tagging is a morphism tau: E* -> T over two tag letters together with a
subset G of T. Numbering the transitions of an automaton by G makes every
transition label distinct; interleaving tag words between the letters then
gives a language over A + E that is recognized by a monoid of polynomial size
and is separable exactly when the original inputs are (for taggings that fool
the class, such as the cyclic ones).
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from algebra import (
    Monoid,
    Morphism,
    RecognizedLanguage,
    _closure_monoid,
    check_associativity,
    compatible_product,
    extend_basis_E,
    tagging_letters,
)
from automata import Alphabet, Letter, Nfa, Transition, trim
import config
from errors import IncompatibleTaggingError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Tagging:
    tau: Morphism
    G: Tuple[int, ...]

    def __post_init__(self):
        G = tuple(sorted(set(int(t) for t in self.G)))
        if len(self.tau.alphabet) != 2:
            raise IncompatibleTaggingError("a tagging reads exactly two tag letters")
        if not G:
            raise IncompatibleTaggingError("a tagging needs a nonempty G")
        if G[0] < 0 or G[-1] >= self.tau.target.size:
            raise IncompatibleTaggingError("G must be a subset of the tagging monoid")
        object.__setattr__(self, "G", G)

    @property
    def rank(self) -> int:
        return len(self.G)

    @property
    def size(self) -> int:
        return self.tau.target.size

    @property
    def tags(self) -> Tuple[Letter, Letter]:
        return tuple(self.tau.alphabet.letters)


def cyclic_tagging(k: int, letters: Tuple[Letter, Letter] = ("0", "1")) -> Tagging:
    """Z/kZ counting the length of tag words modulo k, with G = T."""
    if k < 1:
        raise ValueError("k must be at least 1")
    ids = np.arange(k)
    mul = (ids[:, None] + ids[None, :]) % k
    tau = Morphism(Alphabet(tuple(letters)), Monoid(mul, 0), (1 % k, 1 % k))
    return Tagging(tau, tuple(range(k)))


def transition_order(n: Nfa) -> List[Transition]:
    return n.sorted_transitions()


def _check_compatible(n: Nfa, p: Tagging):
    if n.transition_count > p.rank:
        raise IncompatibleTaggingError(
            f"tagging of rank {p.rank} cannot number {n.transition_count} transitions")
    clash = [t for t in p.tags if t in n.alphabet]
    if clash:
        raise IncompatibleTaggingError(f"tag letters {clash} collide with the input alphabet")


def tagged_letter(a: Letter, t: int) -> Letter:
    return f"{a}|t{t}"


def relabel_nfa(n: Nfa, p: Tagging) -> Nfa:
    """The i-th transition (q, a, r) becomes (q, (a, g_i), r)."""
    _check_compatible(n, p)
    alphabet = Alphabet(tuple(tagged_letter(a, t) for a in n.alphabet for t in range(p.size)))
    transitions = frozenset(
        (q, tagged_letter(a, g), r) for (q, a, r), g in zip(transition_order(n), p.G))
    return Nfa(alphabet, n.state_count, transitions, n.initial, n.final)


def build_L_nfa(n: Nfa, p: Tagging) -> Nfa:
    """
    Automaton for E* . mu^-1(L(A[P])). After reading the letter of
    transition i, a copy of the tagging DFA reads a tag word and sits in
    the target state once the tag value equals g_i.

    States: 0 is the free E* prefix, then one block of |T| states per transition.
    """
    _check_compatible(n, p)
    tags = p.tags
    alphabet = n.alphabet.extended(tags)
    tmul = p.tau.target.mul
    unit = p.tau.target.unit
    tag_images = [p.tau.image_of(b) for b in tags]
    k = p.size
    order = transition_order(n)
    gadget = lambda i, x: 1 + i * k + x
    outgoing: Dict[int, List[Tuple[int, Letter]]] = {}
    for i, (q, a, _) in enumerate(order):
        outgoing.setdefault(q, []).append((i, a))

    # "at state q": the prefix state for initial q, and every gadget state g_i[g_i] for its target
    at_state: List[Tuple[int, int]] = [(0, q) for q in n.initial]
    for i, ((_, _, r), g) in enumerate(zip(order, p.G)):
        at_state.append((gadget(i, g), r))

    transitions = set((0, b, 0) for b in tags)
    for i in range(len(order)):
        for x in range(k):
            for b, y in zip(tags, tag_images):
                transitions.add((gadget(i, x), b, gadget(i, int(tmul[x, y]))))
    final = set()
    for (src, q) in at_state:
        if q in n.final:
            final.add(src)
        for (i, a) in outgoing.get(q, ()):
            transitions.add((src, a, gadget(i, unit)))
    return trim(Nfa(alphabet, 1 + len(order) * k, frozenset(transitions), frozenset({0}), frozenset(final)))


# -------------------------------
# The explicit monoid
# -------------------------------
class _LMonoidCarrier:
    """
    Elements are either t in T (an int) or a tuple (t1, s, a, t2) with s in
    N = Q x Q + {0, 1}. Pairs (q, r) are numbered q * |Q| + r, then 0_N and 1_N.
    """

    def __init__(self, n: Nfa, p: Tagging):
        self.q_count = n.state_count
        self.zero = self.q_count ** 2
        self.one = self.zero + 1
        self.n_size = self.zero + 2
        self.letters = list(n.alphabet)
        self.T = p.tau.target.mul.tolist()
        self.t_unit = p.tau.target.unit
        self.t_size = p.size
        self.N = self._pair_table().tolist()
        # beta[a][t]: the unique relabeled transition reading (a, t), or 0_N
        self.beta = [[self.zero] * self.t_size for _ in self.letters]
        position = {a: i for i, a in enumerate(self.letters)}
        for (q, a, r), g in zip(transition_order(n), p.G):
            self.beta[position[a]][g] = q * self.q_count + r
        self.H = set(q * self.q_count + r for q in n.initial for r in n.final)
        self.accepts_empty = bool(n.initial & n.final)

    def _pair_table(self) -> np.ndarray:
        nq = self.q_count
        ids = np.arange(self.n_size)
        table = np.full((self.n_size, self.n_size), self.zero, dtype=np.int64)
        q = np.arange(nq * nq)
        left_q, left_r = np.divmod(q, nq) if nq else (q, q)
        right_q, right_r = np.divmod(q, nq) if nq else (q, q)
        match = left_r[:, None] == right_q[None, :]
        table[: nq * nq, : nq * nq] = np.where(match, left_q[:, None] * nq + right_r[None, :], self.zero)
        table[self.one, :] = ids
        table[:, self.one] = ids
        return table

    def multiply(self, x, y):
        T, N = self.T, self.N
        if isinstance(x, int):
            if isinstance(y, int):
                return T[x][y]
            t1, s, a, t2 = y
            return (T[x][t1], s, a, t2)
        t1, s, a, t2 = x
        if isinstance(y, int):
            return (t1, s, a, T[t2][y])
        u1, s2, a2, u2 = y
        middle = N[N[s][self.beta[a][T[t2][u1]]]][s2]
        return (t1, middle, a2, u2)

    def accepted(self, x) -> bool:
        if isinstance(x, int):
            return self.accepts_empty
        _, s, a, t2 = x
        return self.N[s][self.beta[a][t2]] in self.H

    def size_bound(self) -> int:
        return self.t_size + len(self.letters) * self.t_size ** 2 * (self.q_count ** 2 + 2)

    def index(self, x) -> int:
        if isinstance(x, int):
            return x
        t1, s, a, t2 = x
        return self.t_size + ((t1 * self.n_size + s) * len(self.letters) + a) * self.t_size + t2

    def full_table(self) -> np.ndarray:
        """Multiplication table of the whole carrier, indexed by index()."""
        elements = list(range(self.t_size))
        for t1 in range(self.t_size):
            for s in range(self.n_size):
                for a in range(len(self.letters)):
                    for t2 in range(self.t_size):
                        elements.append((t1, s, a, t2))
        table = np.empty((len(elements), len(elements)), dtype=np.int64)
        for x in elements:
            row = table[self.index(x)]
            for y in elements:
                row[self.index(y)] = self.index(self.multiply(x, y))
        return table


def build_L_monoid(n: Nfa, p: Tagging, cap: Optional[int] = None, deadline: Optional[float] = None) -> RecognizedLanguage:
    """
    The monoid T + T x N x A x T recognizing the tagged language, restricted
    to the image of the letters.
    """
    _check_compatible(n, p)
    carrier = _LMonoidCarrier(n, p)
    alphabet = n.alphabet.extended(p.tags)
    generators = [(carrier.t_unit, carrier.one, i, carrier.t_unit) for i in range(len(n.alphabet))]
    generators += [p.tau.image_of(b) for b in p.tags]

    keys, monoid, images = _closure_monoid(
        carrier.t_unit, len(generators), lambda x, g: carrier.multiply(x, generators[g]),
        cap or config.MONOID_CAP, "tagged language monoid", deadline)
    bound = carrier.size_bound()
    if monoid.size > bound:
        raise AssertionError(f"monoid of size {monoid.size} breaks the bound {bound}")
    check_associativity(monoid, images)
    accept = frozenset(i for i, x in enumerate(keys) if carrier.accepted(x))
    logger.debug(f"tagged language monoid: {monoid.size} elements (carrier bound {bound})")
    return RecognizedLanguage(Morphism(alphabet, monoid, images), accept)


@dataclass
class ReductionArtifacts:
    relabeled: Nfa
    language_nfa: Nfa
    language_monoid: RecognizedLanguage
    tagging: Tagging
    letter_order: Tuple[Letter, ...]
    transition_order: List[Transition]
    size_bound: int = 0
    stats: Dict[str, Any] = field(default_factory=dict)


def build_artifacts(n: Nfa, p: Tagging) -> ReductionArtifacts:
    carrier = _LMonoidCarrier(n, p)
    monoid = build_L_monoid(n, p)
    return ReductionArtifacts(
        relabeled=relabel_nfa(n, p),
        language_nfa=build_L_nfa(n, p),
        language_monoid=monoid,
        tagging=p,
        letter_order=tuple(n.alphabet),
        transition_order=transition_order(n),
        size_bound=carrier.size_bound(),
        stats={"monoid": monoid.morphism.target.size, "carrier": carrier.size_bound()},
    )


def reduce_instance(n1: Nfa, n2: Nfa, level, deadline: Optional[float] = None):
    """
    Both automata as tagged languages over A + E, with the basis extended to
    ignore the tags. Returns (compatible morphism, F0, F1).
    """
    tags = tagging_letters(n1.alphabet)
    k = max(n1.transition_count, n2.transition_count, 1)
    p = cyclic_tagging(k, tags)
    l1 = build_L_monoid(n1, p, deadline=deadline)
    l2 = build_L_monoid(n2, p, deadline=deadline)
    basis, _ = extend_basis_E(level.basis, n1.alphabet, tags)
    logger.info(f"tagging reduction: k={k}, monoids of size {l1.morphism.target.size} and "
                f"{l2.morphism.target.size}, basis {basis.name}")
    return compatible_product(l1, l2, basis, deadline=deadline)
