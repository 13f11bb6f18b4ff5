"""
corpus.py
---------
Seeded generators for the acceptance suites, the tests and the benchmark:
random automata and formulas, small monoids, compatible-morphism tree
contexts (exhaustive and random) and Pol(AT) certificates.

Every generator takes a random.Random or a seed; nothing reads global state.
"""
import itertools
import logging
import random
from functools import lru_cache
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from algebra import (
    Basis,
    CompatibleMorphism,
    Monoid,
    Morphism,
    canonical_basis_morphism,
    compatible_product,
    image,
    is_good,
    transition_monoid,
)
from automata import Alphabet, Concat, Empty, Eps, LetterSet, Nfa, Star, Sym, Union
from errors import ResourceLimitError
from hardness import EXISTS, FORALL, Qbf
from reduction import Tagging
from separation import Certificate, Level, PolTerm
from trees import TreeContext

logger = logging.getLogger(__name__)

AB = Alphabet(("a", "b"))
UNARY = Alphabet(("a",))


def _rng(seed_or_rng) -> random.Random:
    if isinstance(seed_or_rng, random.Random):
        return seed_or_rng
    return random.Random(seed_or_rng)


# -------------------------------
# Automata and expressions
# -------------------------------
def random_nfa(rng: random.Random, alphabet: Alphabet = AB, max_states: int = 3,
               max_transitions: Optional[int] = None, density: float = 0.35) -> Nfa:
    states = rng.randint(1, max_states)
    candidates = [(p, a, r) for p in range(states) for a in alphabet for r in range(states)]
    transitions = [t for t in candidates if rng.random() < density]
    if max_transitions is not None and len(transitions) > max_transitions:
        transitions = rng.sample(transitions, max_transitions)
    initial = frozenset(q for q in range(states) if rng.random() < 0.5) or frozenset({0})
    final = frozenset(q for q in range(states) if rng.random() < 0.4)
    return Nfa(alphabet, states, frozenset(transitions), initial, final)


def random_nfa_pairs(seed, count: int, max_states: int = 3, max_transitions: Optional[int] = None,
                     alphabet: Alphabet = AB) -> List[Tuple[Nfa, Nfa]]:
    rng = _rng(seed)
    return [(random_nfa(rng, alphabet, max_states, max_transitions),
             random_nfa(rng, alphabet, max_states, max_transitions)) for _ in range(count)]


def random_regex(rng: random.Random, alphabet: Alphabet = AB, depth: int = 4):
    if depth <= 0 or rng.random() < 0.3:
        roll = rng.random()
        if roll < 0.7:
            return Sym(rng.choice(alphabet.letters))
        if roll < 0.8:
            return LetterSet(tuple(sorted(rng.sample(alphabet.letters, 2))))
        return Eps() if roll < 0.95 else Empty()
    kind = rng.choice(("concat", "union", "star"))
    if kind == "star":
        return Star(random_regex(rng, alphabet, depth - 1))
    parts = (random_regex(rng, alphabet, depth - 1), random_regex(rng, alphabet, depth - 1))
    return Concat(parts) if kind == "concat" else Union(parts)


# -------------------------------
# Small monoids
# -------------------------------
@lru_cache(maxsize=None)
def small_monoids(max_size: int = 3) -> Tuple[Monoid, ...]:
    """Every multiplication table on {0..n-1}, n <= max_size, with unit 0 and associative."""
    found = []
    for n in range(1, max_size + 1):
        free = [(x, y) for x in range(1, n) for y in range(1, n)]
        for values in itertools.product(range(n), repeat=len(free)):
            mul = np.zeros((n, n), dtype=np.int64)
            mul[0, :] = np.arange(n)
            mul[:, 0] = np.arange(n)
            for (x, y), v in zip(free, values):
                mul[x, y] = v
            if _associative(mul):
                found.append(Monoid(mul, 0))
    return tuple(found)


def _associative(mul: np.ndarray) -> bool:
    # (xy)z against x(yz) over all triples
    return bool(np.array_equal(mul[mul, :], mul[:, mul]))


def class_maps(M: Monoid, bm: Morphism) -> Iterator[np.ndarray]:
    """Monoid morphisms M -> basis monoid, as arrays."""
    B = bm.target
    for values in itertools.product(range(B.size), repeat=M.size):
        cls = np.array(values, dtype=np.int64)
        if cls[M.unit] != B.unit:
            continue
        if np.array_equal(cls[M.mul], B.mul[cls[:, None], cls[None, :]]):
            yield cls


def compatible_morphisms(M: Monoid, basis: Basis, alphabet: Alphabet) -> Iterator[CompatibleMorphism]:
    bm = canonical_basis_morphism(basis, alphabet)
    for cls in class_maps(M, bm):
        choices = [[x for x in range(M.size) if cls[x] == bm.image_of(a)] for a in alphabet]
        for letters in itertools.product(*choices):
            yield CompatibleMorphism(Morphism(alphabet, M, tuple(letters)), cls, basis, bm)


def good_subsets(beta: Morphism) -> List[frozenset]:
    base = image(beta)
    rest = [t for t in range(beta.target.size) if t not in base]
    out = []
    for r in range(len(rest) + 1):
        for extra in itertools.combinations(rest, r):
            S = frozenset(base | set(extra))
            if is_good(S, beta):
                out.append(S)
    return out


# -------------------------------
# Tree contexts
# -------------------------------
EXHAUSTIVE_BASES = (
    (Basis("triv"), Alphabet(("a",))),
    (Basis("at_restricted", ("a",)), AB),
)


def exhaustive_contexts(max_m: int = 3, max_n: int = 3) -> Iterator[TreeContext]:
    """Every (alpha, beta, S) with |M| <= max_m, |N| <= max_n over bases of size <= 2."""
    for basis, alphabet in EXHAUSTIVE_BASES:
        alphas = [cm for M in small_monoids(max_m) for cm in compatible_morphisms(M, basis, alphabet)]
        betas = [cm for N in small_monoids(max_n) for cm in compatible_morphisms(N, basis, alphabet)]
        for alpha in alphas:
            for beta in betas:
                for S in good_subsets(beta.morphism):
                    yield TreeContext(alpha, beta, S)


def random_context(rng: random.Random, max_m: int = 5, max_n: int = 4, tries: int = 200) -> Optional[TreeContext]:
    """
    alpha and beta are compatible products of small random automata; sizes
    are enforced by rejection. The basis is triv or at (basis monoid of size 4).
    """
    for _ in range(tries):
        basis = rng.choice((Basis("triv"), Basis("at")))
        try:
            pieces = []
            for bound in (max_m, max_n):
                l1 = transition_monoid(random_nfa(rng, AB, 2), cap=64)
                l2 = transition_monoid(random_nfa(rng, AB, 2), cap=64)
                cm, _, _ = compatible_product(l1, l2, basis, cap=bound)
                pieces.append(cm)
        except ResourceLimitError:
            continue
        alpha, beta = pieces
        return TreeContext(alpha, beta, image(beta.morphism))
    logger.warning("no random context within the size bounds")
    return None


def random_contexts(seed, count: int, max_m: int = 5, max_n: int = 4) -> List[TreeContext]:
    rng = _rng(seed)
    out = []
    while len(out) < count:
        ctx = random_context(rng, max_m, max_n)
        if ctx is None:
            break
        out.append(ctx)
    return out


def full_product_context(basis: Basis = Basis("triv"), alphabet: Alphabet = Alphabet(("a",)),
                         max_size: int = 3) -> List[TreeContext]:
    """One context per good subset of a fixed beta, for S-monotonicity checks."""
    out = []
    for N in small_monoids(max_size):
        for beta in compatible_morphisms(N, basis, alphabet):
            subsets = good_subsets(beta.morphism)
            if len(subsets) > 1:
                alpha = next(compatible_morphisms(N, basis, alphabet))
                out.extend(TreeContext(alpha, beta, S) for S in subsets)
    return out


# -------------------------------
# Taggings, certificates, formulas
# -------------------------------
def random_tagging(rng: random.Random, rank: int, letters: Tuple[str, str] = ("0", "1")) -> Tagging:
    """Counting modulo k for some k >= rank, with a random G of the required rank."""
    k = rng.randint(max(rank, 1), max(rank, 1) + 2)
    ids = np.arange(k)
    tau = Morphism(Alphabet(letters), Monoid((ids[:, None] + ids[None, :]) % k, 0),
                   (1 % k, rng.choice([1, 2]) % k))
    G = tuple(sorted(rng.sample(range(k), max(rank, 1))))
    return Tagging(tau, G)


def random_pol_at_certificate(rng: random.Random, alphabet: Alphabet = AB, max_products: int = 3,
                              max_letters: int = 2) -> Certificate:
    classes = range(1 << len(alphabet))
    products = []
    for _ in range(rng.randint(1, max_products)):
        product = []
        for k in range(rng.randint(0, max_letters)):
            product.append(frozenset(rng.sample(list(classes), rng.randint(1, len(classes)))))
            product.append(rng.choice(alphabet.letters))
        product.append(frozenset(rng.sample(list(classes), rng.randint(1, len(classes)))))
        products.append(tuple(product))
    return Certificate(Level.parse("st-3/2"), alphabet, PolTerm(tuple(products)))


def random_qbf(rng: random.Random, max_vars: int = 2, max_clauses: int = 2) -> Qbf:
    n = rng.randint(1, max_vars)
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        width = rng.randint(1, n)
        variables = rng.sample(range(1, n + 1), width)
        clauses.append(frozenset(v if rng.random() < 0.5 else -v for v in variables))
    return Qbf(n, tuple(rng.choice((EXISTS, FORALL)) for _ in range(n)), tuple(clauses))


def one_variable_qbfs() -> List[Qbf]:
    """Both quantifiers over every set of one or two clauses from {x}, {-x}, {x, -x}."""
    clause_pool = (frozenset({1}), frozenset({-1}), frozenset({1, -1}))
    out = []
    for quantifier in (EXISTS, FORALL):
        for size in (1, 2):
            for clauses in itertools.combinations(clause_pool, size):
                out.append(Qbf(1, (quantifier,), tuple(clauses)))
    return out


def pick(seq: Sequence, rng: random.Random, count: int) -> List:
    return list(seq) if len(seq) <= count else rng.sample(list(seq), count)
