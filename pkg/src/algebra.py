"""
algebra.py
----------
Finite monoids given by multiplication tables, recognizing morphisms,
transition monoids of automata, J-depth, bases (finite quotienting Boolean
algebras, represented by their canonical morphism) and compatible morphisms.

Element 0 of every monoid built here by closure is its unit.
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Callable, FrozenSet, Hashable, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from automata import Alphabet, Letter, Nfa
import config
from errors import (
    AlphabetMismatchError,
    InvalidMonoidError,
    ResourceLimitError,
    SeparationError,
    check_deadline,
)

logger = logging.getLogger(__name__)


# -------------------------------
# Monoids and morphisms
# -------------------------------
@dataclass(frozen=True, eq=False)
class Monoid:
    mul: np.ndarray
    unit: int = 0

    def __post_init__(self):
        mul = np.array(self.mul, dtype=np.int64)
        if mul.ndim != 2 or mul.shape[0] != mul.shape[1] or mul.shape[0] == 0:
            raise InvalidMonoidError(f"multiplication table must be a nonempty square, got shape {mul.shape}")
        n = mul.shape[0]
        if mul.min() < 0 or mul.max() >= n:
            raise InvalidMonoidError("multiplication table refers to unknown elements")
        if not 0 <= self.unit < n:
            raise InvalidMonoidError(f"unit {self.unit} is not an element")
        mul.setflags(write=False)
        object.__setattr__(self, "mul", mul)

    @property
    def size(self) -> int:
        return self.mul.shape[0]

    def check_unit(self):
        ids = np.arange(self.size)
        if not (np.array_equal(self.mul[self.unit, :], ids) and np.array_equal(self.mul[:, self.unit], ids)):
            raise InvalidMonoidError(f"element {self.unit} is not a two-sided unit")

    def product(self, elements: Iterable[int]) -> int:
        out = self.unit
        for x in elements:
            out = int(self.mul[out, x])
        return out


def trivial_monoid() -> Monoid:
    return Monoid(np.zeros((1, 1), dtype=np.int64), 0)


@dataclass(frozen=True, eq=False)
class Morphism:
    alphabet: Alphabet
    target: Monoid
    letter_image: Tuple[int, ...]

    def __post_init__(self):
        images = tuple(int(x) for x in self.letter_image)
        if len(images) != len(self.alphabet):
            raise InvalidMonoidError("morphism must give an image to every letter")
        if any(not 0 <= x < self.target.size for x in images):
            raise InvalidMonoidError("letter image is not an element of the target")
        object.__setattr__(self, "letter_image", images)

    def image_of(self, letter: Letter) -> int:
        return self.letter_image[self.alphabet.index(letter)]

    def evaluate(self, word: Sequence[Letter]) -> int:
        return self.target.product(self.image_of(a) for a in word)

    def reorder(self, alphabet: Alphabet) -> "Morphism":
        """Same morphism with letter images listed in another order of the same letters."""
        if not self.alphabet.same_letters(alphabet):
            raise AlphabetMismatchError(f"alphabets differ: {list(self.alphabet)} vs {list(alphabet)}")
        return Morphism(alphabet, self.target, tuple(self.image_of(a) for a in alphabet))


@dataclass(frozen=True, eq=False)
class RecognizedLanguage:
    morphism: Morphism
    accept: FrozenSet[int] = frozenset()

    def __post_init__(self):
        accept = frozenset(int(x) for x in self.accept)
        if any(not 0 <= x < self.morphism.target.size for x in accept):
            raise InvalidMonoidError("accept set is not a subset of the monoid")
        object.__setattr__(self, "accept", accept)

    def contains(self, word: Sequence[Letter]) -> bool:
        return self.morphism.evaluate(word) in self.accept


# -------------------------------
# Closure helpers
# -------------------------------
def _generate(unit_key: Hashable, letter_count: int, step: Callable, cap: int, what: str,
              deadline: Optional[float] = None):
    """
    Breadth-first closure of the unit under right multiplication by the
    generators. Returns the keys in discovery order, the right Cayley table
    and, for every non-unit element, the (parent, generator) pair that
    discovered it.
    """
    keys = [unit_key]
    index = {unit_key: 0}
    right: List[List[int]] = []
    parent = [-1]
    via = [-1]
    i = 0
    while i < len(keys):
        if i % 512 == 0:
            check_deadline(deadline)
        row = []
        for g in range(letter_count):
            key = step(keys[i], g)
            j = index.get(key)
            if j is None:
                if len(keys) >= cap:
                    raise ResourceLimitError(f"{what} size", cap)
                j = len(keys)
                index[key] = j
                keys.append(key)
                parent.append(i)
                via.append(g)
            row.append(j)
        right.append(row)
        i += 1
    right_arr = np.array(right, dtype=np.int64).reshape(len(keys), letter_count)
    return keys, right_arr, parent, via


def _table_from_cayley(right: np.ndarray, parent: List[int], via: List[int]) -> np.ndarray:
    n = right.shape[0]
    mul = np.empty((n, n), dtype=np.int64)
    mul[:, 0] = np.arange(n)
    for y in range(1, n):
        mul[:, y] = right[mul[:, parent[y]], via[y]]
    return mul


def _closure_monoid(unit_key, letter_count, step, cap, what, deadline=None):
    keys, right, parent, via = _generate(unit_key, letter_count, step, cap, what, deadline)
    mul = _table_from_cayley(right, parent, via)
    images = tuple(int(right[0, g]) for g in range(letter_count))
    return keys, Monoid(mul, 0), images


# -------------------------------
# Transition monoid
# -------------------------------
def transition_monoid(n: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> RecognizedLanguage:
    """
    Monoid of Boolean Q x Q relations generated by the letters. A relation is
    packed as a tuple of row bitmasks: row p holds the states reachable from p.
    """
    cap = cap or config.MONOID_CAP
    q_count = n.state_count
    letter_rows = []
    for a in n.alphabet:
        letter_rows.append(tuple(n.successor_masks[p].get(a, 0) for p in range(q_count)))
    unit = tuple(1 << p for p in range(q_count))

    def step(rel, g):
        rows = letter_rows[g]
        out = []
        for row in rel:
            acc = 0
            while row:
                low = row & -row
                acc |= rows[low.bit_length() - 1]
                row ^= low
            out.append(acc)
        return tuple(out)

    keys, monoid, images = _closure_monoid(unit, len(n.alphabet), step, cap, "transition monoid", deadline)
    final_mask = sum(1 << q for q in n.final)
    accept = frozenset(i for i, rel in enumerate(keys) if any(rel[p] & final_mask for p in n.initial))
    logger.debug(f"transition monoid of a {q_count}-state automaton has {monoid.size} elements")
    return RecognizedLanguage(Morphism(n.alphabet, monoid, images), accept)


# -------------------------------
# Elementwise queries
# -------------------------------
def image(m: Morphism) -> FrozenSet[int]:
    mul = m.target.mul
    seen = {m.target.unit}
    queue = deque(seen)
    while queue:
        s = queue.popleft()
        for x in m.letter_image:
            t = int(mul[s, x])
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return frozenset(seen)


def restrict_to_image(rl: RecognizedLanguage) -> Tuple[RecognizedLanguage, np.ndarray]:
    """
    The same language on the submonoid generated by the letters. Also returns
    the embedding (new element index -> old element index).
    """
    m = rl.morphism
    mul = m.target.mul
    keys, monoid, images = _closure_monoid(
        m.target.unit, len(m.alphabet), lambda s, g: int(mul[s, m.letter_image[g]]), config.MONOID_CAP, "image")
    embedding = np.array(keys, dtype=np.int64)
    accept = frozenset(i for i, s in enumerate(keys) if s in rl.accept)
    return RecognizedLanguage(Morphism(m.alphabet, monoid, images), accept), embedding


def idempotents(M: Monoid) -> FrozenSet[int]:
    ids = np.arange(M.size)
    return frozenset(int(e) for e in np.nonzero(M.mul[ids, ids] == ids)[0])


def omega_power(M: Monoid, s: int) -> int:
    x = s
    for _ in range(M.size + 1):
        if M.mul[x, x] == x:
            return int(x)
        x = int(M.mul[x, s])
    raise InvalidMonoidError(f"no idempotent power found for element {s}")


def omega_table(M: Monoid) -> np.ndarray:
    """omega_power of every element at once."""
    ids = np.arange(M.size)
    result = np.full(M.size, -1, dtype=np.int64)
    x = ids.copy()
    for _ in range(M.size + 1):
        hit = (result < 0) & (M.mul[x, x] == x)
        result[hit] = x[hit]
        if (result >= 0).all():
            break
        x = M.mul[x, ids]
    return result


def j_depth(M: Monoid, generators: Optional[Iterable[int]] = None) -> int:
    """
    Longest strictly descending chain in the J-order. With generators given,
    only their left/right multiplications are followed (enough when they
    generate M).
    """
    gens = sorted(set(int(g) for g in generators)) if generators is not None else list(range(M.size))
    graph = nx.DiGraph()
    graph.add_nodes_from(range(M.size))
    for g in gens:
        graph.add_edges_from(zip(range(M.size), M.mul[g, :].tolist()))
        graph.add_edges_from(zip(range(M.size), M.mul[:, g].tolist()))
    dag = nx.condensation(graph)
    return nx.dag_longest_path_length(dag) + 1


def check_associativity(M: Monoid, generators: Optional[Iterable[int]] = None):
    """
    Exhaustive check, or Light's test on a generating set: (xy)g = x(yg) for
    all x, y and generators g.
    """
    mul = M.mul
    if generators is None:
        for x in range(M.size):
            if not np.array_equal(mul[mul[x, :], :], mul[x, :][mul]):
                raise InvalidMonoidError(f"multiplication is not associative (left factor {x})")
        return
    for g in generators:
        if not np.array_equal(mul[:, g][mul], mul[:, mul[:, g]]):
            raise InvalidMonoidError(f"multiplication is not associative (generator {g})")


# -------------------------------
# Bases
# -------------------------------
BASIS_KINDS = ("triv", "at", "at_restricted", "user")


@dataclass(frozen=True)
class Basis:
    kind: str
    letters: Optional[Tuple[Letter, ...]] = None
    path: Optional[str] = None

    def __post_init__(self):
        if self.kind not in BASIS_KINDS:
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.kind == "at_restricted" and self.letters is None:
            raise ValueError("at_restricted needs its letter set")
        if self.kind == "user" and not self.path:
            raise ValueError("user basis needs a morphism file")
        if self.letters is not None:
            object.__setattr__(self, "letters", tuple(self.letters))

    @classmethod
    def parse(cls, text: str) -> "Basis":
        text = text.strip()
        if text in ("triv", "at"):
            return cls(text)
        if text.startswith("at:"):
            letters = [a.strip() for a in text[3:].split(",") if a.strip()]
            return cls("at_restricted", tuple(letters))
        if text.startswith("user:"):
            return cls("user", path=text[5:])
        raise ValueError(f"unknown basis {text!r} (expected triv, at, at:a,b or user:path)")

    @property
    def name(self) -> str:
        if self.kind == "at_restricted":
            return "at:" + ",".join(self.letters)
        if self.kind == "user":
            return f"user:{self.path}"
        return self.kind

    def is_alphabet_testable(self) -> bool:
        return self.kind in ("at", "at_restricted")

    def height(self, alphabet: Alphabet) -> int:
        """J-depth of the basis monoid over the alphabet."""
        if self.kind == "triv":
            return 1
        if self.kind == "at":
            return len(alphabet) + 1
        if self.kind == "at_restricted":
            return len(self.letters) + 1
        bm = canonical_basis_morphism(self, alphabet)
        return j_depth(bm.target, bm.letter_image)


def _subset_union_monoid(k: int) -> Monoid:
    ids = np.arange(1 << k, dtype=np.int64)
    return Monoid(np.bitwise_or.outer(ids, ids), 0)


def canonical_basis_morphism(b: Basis, alphabet: Alphabet) -> Morphism:
    if b.kind == "triv":
        return Morphism(alphabet, trivial_monoid(), tuple(0 for _ in alphabet))
    if b.kind == "at":
        return Morphism(alphabet, _subset_union_monoid(len(alphabet)),
                        tuple(1 << i for i in range(len(alphabet))))
    if b.kind == "at_restricted":
        missing = [a for a in b.letters if a not in alphabet]
        if missing:
            raise AlphabetMismatchError(f"restricted letters {missing} are not in the alphabet")
        position = {a: i for i, a in enumerate(b.letters)}
        return Morphism(alphabet, _subset_union_monoid(len(b.letters)),
                        tuple(1 << position[a] if a in position else 0 for a in alphabet))
    return _load_user_basis(b.path, alphabet)


def _load_user_basis(path: str, alphabet: Alphabet) -> Morphism:
    from serialization import load_morphism_file

    rl = load_morphism_file(path)
    m = rl.morphism
    if not m.alphabet.same_letters(alphabet):
        raise AlphabetMismatchError(f"user basis {path} is over {list(m.alphabet)}, expected {list(alphabet)}")
    m = m.reorder(alphabet)
    if len(image(m)) != m.target.size:
        raise InvalidMonoidError(f"user basis {path} is not surjective onto its monoid")
    return m


def tagging_letters(alphabet: Alphabet) -> Tuple[Letter, Letter]:
    pair = ("0", "1")
    suffix = ""
    while pair[0] in alphabet or pair[1] in alphabet:
        suffix += "_"
        pair = (f"_t0{suffix[1:]}", f"_t1{suffix[1:]}")
    return pair


def extend_basis_E(b: Basis, alphabet: Alphabet, tags: Tuple[Letter, Letter] = ("0", "1")) -> Tuple[Basis, Alphabet]:
    """
    The basis over A plus the two tag letters whose classes ignore the tags.
    Returns the new basis and the extended alphabet.
    """
    clash = [t for t in tags if t in alphabet]
    if clash:
        raise AlphabetMismatchError(f"tag letters {clash} already belong to the alphabet; rename them first")
    extended = alphabet.extended(tags)
    if b.kind == "triv":
        return b, extended
    if b.kind == "at":
        return Basis("at_restricted", tuple(alphabet.letters)), extended
    if b.kind == "at_restricted":
        return b, extended
    raise SeparationError("only triv, at and at:... bases can be extended with tag letters")


# -------------------------------
# Compatible morphisms
# -------------------------------
@dataclass(frozen=True, eq=False)
class CompatibleMorphism:
    morphism: Morphism
    class_of: np.ndarray
    basis: Basis
    basis_morphism: Morphism

    def __post_init__(self):
        cls = np.array(self.class_of, dtype=np.int64)
        cls.setflags(write=False)
        object.__setattr__(self, "class_of", cls)

    @property
    def alphabet(self) -> Alphabet:
        return self.morphism.alphabet

    @property
    def monoid(self) -> Monoid:
        return self.morphism.target

    def validate(self):
        m, bm = self.morphism, self.basis_morphism
        if self.class_of.shape != (m.target.size,):
            raise InvalidMonoidError("class map must cover every element")
        bmul = bm.target.mul
        expected = bmul[self.class_of[:, None], self.class_of[None, :]]
        if not np.array_equal(self.class_of[m.target.mul], expected):
            raise InvalidMonoidError("class map is not a monoid morphism")
        if self.class_of[m.target.unit] != bm.target.unit:
            raise InvalidMonoidError("class map does not send the unit to the unit")
        for a in m.alphabet:
            if self.class_of[m.image_of(a)] != bm.image_of(a):
                raise InvalidMonoidError(f"class of letter {a!r} disagrees with the basis")


def compatible_product(l1: RecognizedLanguage, l2: RecognizedLanguage, b: Basis,
                       cap: Optional[int] = None, deadline: Optional[float] = None):
    """
    Reachable part of M1 x M2 x (basis monoid). Returns the compatible
    morphism and the lifted accept sets of both languages.
    """
    cap = cap or config.MONOID_CAP
    alphabet = l1.morphism.alphabet
    m1 = l1.morphism
    m2 = l2.morphism.reorder(alphabet)
    bm = canonical_basis_morphism(b, alphabet)
    mul1, mul2, bmul = m1.target.mul, m2.target.mul, bm.target.mul
    gens = list(zip(m1.letter_image, m2.letter_image, bm.letter_image))

    def step(key, g):
        x1, x2, c = key
        g1, g2, gb = gens[g]
        return int(mul1[x1, g1]), int(mul2[x2, g2]), int(bmul[c, gb])

    unit = (m1.target.unit, m2.target.unit, bm.target.unit)
    keys, monoid, images = _closure_monoid(unit, len(alphabet), step, cap, "compatible product", deadline)
    cm = CompatibleMorphism(
        Morphism(alphabet, monoid, images),
        np.array([k[2] for k in keys], dtype=np.int64),
        b,
        bm,
    )
    accept0 = frozenset(i for i, k in enumerate(keys) if k[0] in l1.accept)
    accept1 = frozenset(i for i, k in enumerate(keys) if k[1] in l2.accept)
    logger.info(f"compatible product over basis {b.name}: {monoid.size} elements")
    return cm, accept0, accept1


def is_good(S: Iterable[int], beta: Morphism) -> bool:
    members = np.array(sorted(set(int(s) for s in S)), dtype=np.int64)
    if members.size == 0:
        return False
    if not image(beta) <= set(members.tolist()):
        return False
    closed = beta.target.mul[np.ix_(members, members)]
    return bool(np.isin(closed, members).all())
