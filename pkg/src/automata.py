"""
automata.py
-----------
Nondeterministic automata over symbolic alphabets.

- Letters are arbitrary nonempty string tokens ("a", "h1", "a|t3").
- Automata are immutable and epsilon-free; epsilon moves only exist inside the
  regular-expression compiler and the combinators, and are eliminated before
  an Nfa is returned.
- Boolean operations and decision procedures (emptiness, inclusion,
  equivalence) go through a capped subset construction.
"""
import itertools
import logging
import sys
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

import config
from errors import (
    AlphabetMismatchError,
    RegexSyntaxError,
    ResourceLimitError,
    UnknownLetterError,
    check_deadline,
)

logger = logging.getLogger(__name__)

Letter = str
Word = Tuple[Letter, ...]
Transition = Tuple[int, Letter, int]


# -------------------------------
# Alphabets and automata
# -------------------------------
@dataclass(frozen=True)
class Alphabet:
    letters: Tuple[Letter, ...] = ()

    def __post_init__(self):
        letters = tuple(sys.intern(str(a)) for a in self.letters)
        if any(not a for a in letters):
            raise ValueError("letters must be nonempty tokens")
        if len(set(letters)) != len(letters):
            raise ValueError(f"duplicate letters in alphabet {letters}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def of(cls, *letters: Letter) -> "Alphabet":
        if len(letters) == 1 and not isinstance(letters[0], str):
            letters = tuple(letters[0])
        return cls(tuple(letters))

    def __iter__(self) -> Iterator[Letter]:
        return iter(self.letters)

    def __len__(self) -> int:
        return len(self.letters)

    def __contains__(self, letter) -> bool:
        return letter in self._positions

    @cached_property
    def _positions(self) -> Dict[Letter, int]:
        return {a: i for i, a in enumerate(self.letters)}

    def index(self, letter: Letter) -> int:
        try:
            return self._positions[letter]
        except KeyError:
            raise UnknownLetterError(letter)

    def extended(self, extra: Iterable[Letter]) -> "Alphabet":
        """Same alphabet with the new letters appended in order (existing ones are kept)."""
        out = list(self.letters)
        for a in extra:
            if a not in self:
                out.append(a)
        return Alphabet(tuple(out))

    def same_letters(self, other: "Alphabet") -> bool:
        return set(self.letters) == set(other.letters)


@dataclass(frozen=True)
class Nfa:
    alphabet: Alphabet
    state_count: int
    transitions: FrozenSet[Transition] = frozenset()
    initial: FrozenSet[int] = frozenset()
    final: FrozenSet[int] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "transitions", frozenset(self.transitions))
        object.__setattr__(self, "initial", frozenset(self.initial))
        object.__setattr__(self, "final", frozenset(self.final))
        if self.state_count < 0:
            raise ValueError("state_count must be non-negative")
        for q in itertools.chain(self.initial, self.final):
            if not 0 <= q < self.state_count:
                raise ValueError(f"state {q} out of range 0..{self.state_count - 1}")
        for (p, a, r) in self.transitions:
            if not (0 <= p < self.state_count and 0 <= r < self.state_count):
                raise ValueError(f"transition {(p, a, r)} uses a state out of range")
            if a not in self.alphabet:
                raise UnknownLetterError(a)

    @cached_property
    def successors(self) -> Tuple[Dict[Letter, Tuple[int, ...]], ...]:
        succ: List[Dict[Letter, List[int]]] = [dict() for _ in range(self.state_count)]
        for (p, a, r) in self.transitions:
            succ[p].setdefault(a, []).append(r)
        return tuple({a: tuple(sorted(rs)) for a, rs in d.items()} for d in succ)

    @cached_property
    def successor_masks(self) -> Tuple[Dict[Letter, int], ...]:
        out = []
        for d in self.successors:
            out.append({a: sum(1 << r for r in rs) for a, rs in d.items()})
        return tuple(out)

    def sorted_transitions(self) -> List[Transition]:
        return sorted(self.transitions, key=lambda t: (t[0], t[1], t[2]))

    @property
    def transition_count(self) -> int:
        return len(self.transitions)


def _require_same_alphabet(n1: Nfa, n2: Nfa):
    if not n1.alphabet.same_letters(n2.alphabet):
        raise AlphabetMismatchError(
            f"alphabets differ: {list(n1.alphabet)} vs {list(n2.alphabet)}"
        )


def _check_word(alphabet: Alphabet, word: Sequence[Letter]):
    for a in word:
        if a not in alphabet:
            raise UnknownLetterError(a)


# -------------------------------
# Basic automata
# -------------------------------
def empty_nfa(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, frozenset(), frozenset({0}), frozenset())


def epsilon_nfa(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, frozenset(), frozenset({0}), frozenset({0}))


def universal_nfa(alphabet: Alphabet) -> Nfa:
    return Nfa(alphabet, 1, frozenset((0, a, 0) for a in alphabet), frozenset({0}), frozenset({0}))


def letters_nfa(alphabet: Alphabet, letters: Iterable[Letter]) -> Nfa:
    """Accepts exactly the one-letter words over the given letters."""
    letters = list(letters)
    _check_word(alphabet, letters)
    return Nfa(alphabet, 2, frozenset((0, a, 1) for a in letters), frozenset({0}), frozenset({1}))


def word_nfa(alphabet: Alphabet, word: Sequence[Letter]) -> Nfa:
    _check_word(alphabet, word)
    n = len(word)
    return Nfa(alphabet, n + 1, frozenset((i, a, i + 1) for i, a in enumerate(word)),
               frozenset({0}), frozenset({n}))


def trim(n: Nfa) -> Nfa:
    """Drops states that are not both reachable and co-reachable, renumbering the rest."""
    forward = set(n.initial)
    stack = list(n.initial)
    while stack:
        p = stack.pop()
        for rs in n.successors[p].values():
            for r in rs:
                if r not in forward:
                    forward.add(r)
                    stack.append(r)
    preds: Dict[int, List[int]] = {}
    for (p, _, r) in n.transitions:
        preds.setdefault(r, []).append(p)
    backward = set(n.final)
    stack = list(n.final)
    while stack:
        r = stack.pop()
        for p in preds.get(r, ()):
            if p not in backward:
                backward.add(p)
                stack.append(p)
    useful = sorted(forward & backward)
    if not useful:
        return empty_nfa(n.alphabet)
    renum = {q: i for i, q in enumerate(useful)}
    return Nfa(
        n.alphabet,
        len(useful),
        frozenset((renum[p], a, renum[r]) for (p, a, r) in n.transitions if p in renum and r in renum),
        frozenset(renum[q] for q in n.initial if q in renum),
        frozenset(renum[q] for q in n.final if q in renum),
    )


# -------------------------------
# Epsilon builder (Thompson fragments)
# -------------------------------
class _EpsBuilder:
    def __init__(self, alphabet: Alphabet):
        self.alphabet = alphabet
        self.count = 0
        self.moves: List[Transition] = []
        self.eps: Dict[int, List[int]] = {}

    def state(self) -> int:
        self.count += 1
        return self.count - 1

    def move(self, p: int, a: Letter, r: int):
        self.moves.append((p, a, r))

    def link(self, p: int, r: int):
        self.eps.setdefault(p, []).append(r)

    def embed(self, n: Nfa) -> Tuple[int, int]:
        offset = self.count
        self.count += n.state_count
        start, end = self.state(), self.state()
        for (p, a, r) in n.transitions:
            self.move(p + offset, a, r + offset)
        for q in n.initial:
            self.link(start, q + offset)
        for q in n.final:
            self.link(q + offset, end)
        return start, end

    def finish(self, start: int, end: int) -> Nfa:
        closure: Dict[int, FrozenSet[int]] = {}
        for q in range(self.count):
            seen = {q}
            stack = [q]
            while stack:
                p = stack.pop()
                for r in self.eps.get(p, ()):
                    if r not in seen:
                        seen.add(r)
                        stack.append(r)
            closure[q] = frozenset(seen)
        out: Dict[int, List[Tuple[Letter, int]]] = {}
        for (p, a, r) in self.moves:
            out.setdefault(p, []).append((a, r))
        transitions = set()
        for q in range(self.count):
            for p in closure[q]:
                for (a, r) in out.get(p, ()):
                    transitions.add((q, a, r))
        final = frozenset(q for q in range(self.count) if end in closure[q])
        return trim(Nfa(self.alphabet, self.count, frozenset(transitions), frozenset({start}), final))


def concat(*parts: Nfa) -> Nfa:
    if not parts:
        raise ValueError("concat needs at least one automaton")
    for n in parts[1:]:
        _require_same_alphabet(parts[0], n)
    b = _EpsBuilder(parts[0].alphabet)
    start = b.state()
    cur = start
    for n in parts:
        s, e = b.embed(n)
        b.link(cur, s)
        cur = e
    return b.finish(start, cur)


def star(n: Nfa) -> Nfa:
    b = _EpsBuilder(n.alphabet)
    start = b.state()
    s, e = b.embed(n)
    b.link(start, s)
    b.link(e, start)
    return b.finish(start, start)


def union(*parts: Nfa) -> Nfa:
    """Disjoint sum: no epsilon moves needed."""
    if not parts:
        raise ValueError("union needs at least one automaton")
    for n in parts[1:]:
        _require_same_alphabet(parts[0], n)
    offset = 0
    transitions, initial, final = set(), set(), set()
    for n in parts:
        transitions.update((p + offset, a, r + offset) for (p, a, r) in n.transitions)
        initial.update(q + offset for q in n.initial)
        final.update(q + offset for q in n.final)
        offset += n.state_count
    return Nfa(parts[0].alphabet, offset, frozenset(transitions), frozenset(initial), frozenset(final))


def with_alphabet(n: Nfa, alphabet: Alphabet) -> Nfa:
    """Same language seen over a larger alphabet."""
    missing = [a for a in n.alphabet if a not in alphabet]
    if missing:
        raise AlphabetMismatchError(f"letters {missing} are not in the target alphabet")
    return Nfa(alphabet, n.state_count, n.transitions, n.initial, n.final)


def project(n: Nfa, mapping: Dict[Letter, Letter], alphabet: Alphabet) -> Nfa:
    """Image of L(n) under the letter-to-letter map."""
    return Nfa(
        alphabet,
        n.state_count,
        frozenset((p, mapping[a], r) for (p, a, r) in n.transitions),
        n.initial,
        n.final,
    )


# -------------------------------
# Regular expressions
# -------------------------------
EPS_TOKEN = "_EPS_"
EMPTY_TOKEN = "_EMPTY_"
_SPECIAL = set("+*()[],\"'")


@dataclass(frozen=True)
class Sym:
    letter: Letter


@dataclass(frozen=True)
class LetterSet:
    letters: Tuple[Letter, ...]


@dataclass(frozen=True)
class Eps:
    pass


@dataclass(frozen=True)
class Empty:
    pass


@dataclass(frozen=True)
class Concat:
    parts: Tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class Union:
    parts: Tuple = field(default_factory=tuple)


@dataclass(frozen=True)
class Star:
    inner: object


class _RegexParser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.alphabet = alphabet
        self.pos = 0
        # longest tokens first so that "h1" wins over "h"
        self.bare = sorted(
            (a for a in alphabet if not (set(a) & _SPECIAL) and not any(c.isspace() for c in a)),
            key=len,
            reverse=True,
        )

    def skip(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> Optional[str]:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else None

    def expect(self, ch: str):
        if self.peek() != ch:
            raise RegexSyntaxError(f"expected {ch!r}", self.pos)
        self.pos += 1

    def parse(self):
        node = self.expr()
        if self.peek() is not None:
            raise RegexSyntaxError(f"unexpected {self.text[self.pos]!r}", self.pos)
        return node

    def expr(self):
        parts = [self.term()]
        while self.peek() == "+":
            self.pos += 1
            parts.append(self.term())
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def term(self):
        parts = []
        while True:
            ch = self.peek()
            if ch is None or ch in "+)":
                break
            parts.append(self.factor())
        if not parts:
            raise RegexSyntaxError("empty expression", self.pos)
        return parts[0] if len(parts) == 1 else Concat(tuple(parts))

    def factor(self):
        node = self.atom()
        while self.peek() == "*":
            self.pos += 1
            if not isinstance(node, Star):
                node = Star(node)
        return node

    def atom(self):
        ch = self.peek()
        if ch == "(":
            self.pos += 1
            node = self.expr()
            self.expect(")")
            return node
        if ch == "[":
            self.pos += 1
            letters = [self.letter()]
            while self.peek() == ",":
                self.pos += 1
                letters.append(self.letter())
            self.expect("]")
            return LetterSet(tuple(dict.fromkeys(letters)))
        if ch in ("*", ",", "]"):
            raise RegexSyntaxError(f"unexpected {ch!r}", self.pos)
        for keyword, node in ((EPS_TOKEN, Eps()), (EMPTY_TOKEN, Empty())):
            if self.text.startswith(keyword, self.pos) and keyword not in self.alphabet:
                self.pos += len(keyword)
                return node
        return Sym(self.letter())

    def letter(self) -> Letter:
        ch = self.peek()
        if ch is None:
            raise RegexSyntaxError("expected a letter", self.pos)
        if ch in "\"'":
            close = self.text.find(ch, self.pos + 1)
            if close < 0:
                raise RegexSyntaxError("unterminated quoted letter", self.pos)
            token = self.text[self.pos + 1:close]
            if token not in self.alphabet:
                raise UnknownLetterError(token)
            self.pos = close + 1
            return token
        for token in self.bare:
            if self.text.startswith(token, self.pos):
                self.pos += len(token)
                return token
        if ch in _SPECIAL:
            raise RegexSyntaxError(f"expected a letter, found {ch!r}", self.pos)
        end = self.pos
        while end < len(self.text) and not self.text[end].isspace() and self.text[end] not in _SPECIAL:
            end += 1
        raise UnknownLetterError(self.text[self.pos:end])


def parse_regex_ast(text: str, alphabet: Alphabet):
    return _RegexParser(text, alphabet).parse()


def compile_regex(node, alphabet: Alphabet) -> Nfa:
    b = _EpsBuilder(alphabet)

    def build(nd) -> Tuple[int, int]:
        s, e = b.state(), b.state()
        if isinstance(nd, Sym):
            b.move(s, nd.letter, e)
        elif isinstance(nd, LetterSet):
            for a in nd.letters:
                b.move(s, a, e)
        elif isinstance(nd, Eps):
            b.link(s, e)
        elif isinstance(nd, Empty):
            pass
        elif isinstance(nd, Concat):
            cur = s
            for part in nd.parts:
                ps, pe = build(part)
                b.link(cur, ps)
                cur = pe
            b.link(cur, e)
        elif isinstance(nd, Union):
            for part in nd.parts:
                ps, pe = build(part)
                b.link(s, ps)
                b.link(pe, e)
        elif isinstance(nd, Star):
            ps, pe = build(nd.inner)
            b.link(s, ps)
            b.link(pe, s)
            b.link(s, e)
        else:
            raise TypeError(f"not a regex node: {nd!r}")
        return s, e

    start, end = build(node)
    return b.finish(start, end)


def parse_regex(text: str, alphabet: Alphabet) -> Nfa:
    """
    Compile a regular expression into an epsilon-free NFA.

    Grammar: `+` union, juxtaposition for concatenation, postfix `*`, `( )`,
    `_EPS_` for the empty word, `_EMPTY_` for the empty language and `[x,y]`
    for a set of letters. Letters are written bare (longest alphabet token
    wins) or quoted.
    """
    return compile_regex(parse_regex_ast(text, alphabet), alphabet)


def _format_letter(a: Letter) -> str:
    if a in (EPS_TOKEN, EMPTY_TOKEN) or (set(a) & _SPECIAL) or any(c.isspace() for c in a):
        quote = "'" if '"' in a else '"'
        return f"{quote}{a}{quote}"
    return a


def format_regex(node) -> str:
    def fmt(nd, prec: int) -> str:
        if isinstance(nd, Sym):
            return _format_letter(nd.letter)
        if isinstance(nd, LetterSet):
            return "[" + ",".join(_format_letter(a) for a in nd.letters) + "]"
        if isinstance(nd, Eps):
            return EPS_TOKEN
        if isinstance(nd, Empty):
            return EMPTY_TOKEN
        if isinstance(nd, Star):
            return fmt(nd.inner, 2) + "*"
        if isinstance(nd, Concat):
            out = " ".join(fmt(p, 1) for p in nd.parts)
            return f"({out})" if prec > 1 else out
        if isinstance(nd, Union):
            out = " + ".join(fmt(p, 0) for p in nd.parts)
            return f"({out})" if prec > 0 else out
        raise TypeError(f"not a regex node: {nd!r}")

    return fmt(node, 0)


# -------------------------------
# Decision procedures
# -------------------------------
def accepts(n: Nfa, word: Sequence[Letter]) -> bool:
    _check_word(n.alphabet, word)
    current = set(n.initial)
    for a in word:
        nxt = set()
        for q in current:
            nxt.update(n.successors[q].get(a, ()))
        if not nxt:
            return False
        current = nxt
    return bool(current & n.final)


def is_empty(n: Nfa) -> bool:
    seen = set(n.initial)
    queue = deque(n.initial)
    while queue:
        q = queue.popleft()
        if q in n.final:
            return False
        for rs in n.successors[q].values():
            for r in rs:
                if r not in seen:
                    seen.add(r)
                    queue.append(r)
    return True


def determinize(n: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> Nfa:
    """Complete DFA by subset construction; the empty subset is kept as a sink state."""
    cap = cap or config.DET_CAP
    masks = n.successor_masks
    final_mask = sum(1 << q for q in n.final)
    start = sum(1 << q for q in n.initial)
    index = {start: 0}
    order = [start]
    transitions = []
    queue = deque([start])
    while queue:
        check_deadline(deadline)
        subset = queue.popleft()
        src = index[subset]
        for a in n.alphabet:
            target = 0
            bits = subset
            while bits:
                low = bits & -bits
                target |= masks[low.bit_length() - 1].get(a, 0)
                bits ^= low
            if target not in index:
                if len(index) >= cap:
                    raise ResourceLimitError("determinization states", cap)
                index[target] = len(order)
                order.append(target)
                queue.append(target)
            transitions.append((src, a, index[target]))
    final = frozenset(i for i, s in enumerate(order) if s & final_mask)
    logger.debug(f"determinized {n.state_count} states into {len(order)}")
    return Nfa(n.alphabet, len(order), frozenset(transitions), frozenset({0}), final)


def minimize(n: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> Nfa:
    """Minimal complete DFA, by Moore refinement of the subset construction."""
    d = determinize(n, cap, deadline)
    letters = d.alphabet.letters
    delta = [[d.successors[q][a][0] for a in letters] for q in range(d.state_count)]
    block = [1 if q in d.final else 0 for q in range(d.state_count)]
    while True:
        check_deadline(deadline)
        numbering: Dict[Tuple[int, ...], int] = {}
        refined = [numbering.setdefault((block[q],) + tuple(block[r] for r in delta[q]), len(numbering))
                   for q in range(d.state_count)]
        stable = len(numbering) == len(set(block))
        block = refined
        if stable:
            break
    transitions = frozenset((block[q], a, block[delta[q][i]])
                            for q in range(d.state_count) for i, a in enumerate(letters))
    return Nfa(d.alphabet, max(block) + 1, transitions, frozenset({block[0]}),
               frozenset(block[q] for q in d.final))


def complement(n: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> Nfa:
    d = determinize(n, cap, deadline)
    return Nfa(d.alphabet, d.state_count, d.transitions, d.initial,
               frozenset(range(d.state_count)) - d.final)


def intersect(n1: Nfa, n2: Nfa) -> Nfa:
    _require_same_alphabet(n1, n2)
    index: Dict[Tuple[int, int], int] = {}
    queue = deque()
    for p in sorted(n1.initial):
        for q in sorted(n2.initial):
            index[(p, q)] = len(index)
            queue.append((p, q))
    transitions = []
    while queue:
        p, q = queue.popleft()
        src = index[(p, q)]
        for a, rs1 in n1.successors[p].items():
            rs2 = n2.successors[q].get(a)
            if not rs2:
                continue
            for r1 in rs1:
                for r2 in rs2:
                    if (r1, r2) not in index:
                        index[(r1, r2)] = len(index)
                        queue.append((r1, r2))
                    transitions.append((src, a, index[(r1, r2)]))
    initial = frozenset(range(len(n1.initial) * len(n2.initial)))
    final = frozenset(i for (p, q), i in index.items() if p in n1.final and q in n2.final)
    return Nfa(n1.alphabet, len(index), frozenset(transitions), initial, final)


def includes(n1: Nfa, n2: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> bool:
    """True iff L(n1) contains L(n2)."""
    _require_same_alphabet(n1, n2)
    if is_empty(n2):
        return True
    return is_empty(intersect(n2, complement(n1, cap, deadline)))


def equivalent(n1: Nfa, n2: Nfa, cap: Optional[int] = None, deadline: Optional[float] = None) -> bool:
    return includes(n1, n2, cap, deadline) and includes(n2, n1, cap, deadline)


def words(alphabet: Alphabet, max_length: int) -> Iterator[Word]:
    """All words up to the given length, shortest first."""
    for k in range(max_length + 1):
        yield from itertools.product(alphabet.letters, repeat=k)


def morphism_to_nfa(rl) -> Nfa:
    """
    Automaton with one state per monoid element reading letters by right
    multiplication; it recognizes the preimage of the accept set.
    """
    m = rl.morphism
    mul = m.target.mul
    transitions = set()
    for s in range(m.target.size):
        for a, x in zip(m.alphabet.letters, m.letter_image):
            transitions.add((s, a, int(mul[s, x])))
    return Nfa(m.alphabet, m.target.size, frozenset(transitions),
               frozenset({m.target.unit}), frozenset(rl.accept))
