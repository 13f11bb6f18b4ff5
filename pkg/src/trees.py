"""
trees.py
--------
Root labels of (alpha, beta, S)-trees.

A label is a pair (s, T) with s in M and T a subset of N. Leaves carry
(alpha(w), {beta(w)}), binary nodes multiply labels (any subset of the product
set is allowed), and an S-operation node turns an idempotent label (e, E) into
(e, T) with T a subset of E . X_e . E, where X_e holds the elements of S in the
class of e.

Families of labels are downward closed in the set component, so they are
stored per element s as an antichain of maximal sets (Python ints used as
bitsets over N).
"""
import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import numpy as np

from algebra import CompatibleMorphism, is_good
import config
from errors import ResourceLimitError, SeparationError, check_deadline

logger = logging.getLogger(__name__)


def bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def mask_of(elements: Iterable[int]) -> int:
    out = 0
    for x in elements:
        out |= 1 << int(x)
    return out


def submasks(mask: int) -> Iterator[int]:
    sub = mask
    while True:
        yield sub
        if sub == 0:
            return
        sub = (sub - 1) & mask


# -------------------------------
# Subset monoid over N
# -------------------------------
class SetAlgebra:
    """Setwise products in (2^N, .), with memoised products."""

    _NUMPY_THRESHOLD = 256

    def __init__(self, mul: np.ndarray):
        self.mul = mul
        self.rows = mul.tolist()
        self.size = mul.shape[0]
        self._nbytes = (self.size + 7) // 8
        self._cache: Dict[Tuple[int, int], int] = {}

    def indices(self, mask: int) -> np.ndarray:
        raw = np.frombuffer(mask.to_bytes(self._nbytes, "little"), dtype=np.uint8)
        return np.nonzero(np.unpackbits(raw, bitorder="little")[: self.size])[0]

    def from_indices(self, idx: np.ndarray) -> int:
        flags = np.zeros(self._nbytes * 8, dtype=np.uint8)
        flags[idx] = 1
        return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")

    def product(self, a: int, b: int) -> int:
        key = (a, b)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        if not a or not b:
            out = 0
        else:
            left, right = list(bits(a)), list(bits(b))
            if len(left) * len(right) <= self._NUMPY_THRESHOLD:
                out = 0
                for x in left:
                    row = self.rows[x]
                    for y in right:
                        out |= 1 << row[y]
            else:
                out = self.from_indices(np.unique(self.mul[np.ix_(left, right)]))
        if len(self._cache) < config.SET_CACHE_CAP:
            self._cache[key] = out
        return out

    def omega(self, a: int) -> int:
        """Idempotent power of a set."""
        power = a
        for _ in range(1 << min(self.size, 20)):
            if self.product(power, power) == power:
                return power
            power = self.product(power, a)
        raise SeparationError("no idempotent power found in the subset monoid")


# -------------------------------
# Context and label families
# -------------------------------
@dataclass(frozen=True, eq=False)
class TreeContext:
    alpha: CompatibleMorphism
    beta: CompatibleMorphism
    S: FrozenSet[int]

    def __post_init__(self):
        object.__setattr__(self, "S", frozenset(int(t) for t in self.S))
        if self.alpha.basis != self.beta.basis:
            raise SeparationError("alpha and beta must be compatible with the same basis")
        if not self.alpha.alphabet.same_letters(self.beta.alphabet):
            raise SeparationError("alpha and beta must share their alphabet")
        if not is_good(self.S, self.beta.morphism):
            raise SeparationError("S is not a good subset for beta")

    @property
    def M(self):
        return self.alpha.monoid

    @property
    def N(self):
        return self.beta.monoid

    def class_mask(self, s: int) -> int:
        """Elements of S whose class is the class of s in M."""
        wanted = self.alpha.class_of[s]
        return mask_of(t for t in self.S if self.beta.class_of[t] == wanted)


@dataclass(frozen=True, eq=False)
class LabelFamily:
    context: TreeContext
    sets: Dict[int, Tuple[int, ...]]
    height: int = 0
    stats: Dict[str, object] = field(default_factory=dict)

    def has_root_label(self, s: int, t: int) -> bool:
        bit = 1 << t
        return any(T & bit for T in self.sets.get(s, ()))

    def maximal_sets(self, s: int) -> Tuple[int, ...]:
        return self.sets.get(s, ())

    def size(self) -> int:
        return sum(len(v) for v in self.sets.values())

    def downward_closure(self) -> Set[Tuple[int, int]]:
        out = set()
        for s, family in self.sets.items():
            for T in family:
                out.update((s, sub) for sub in submasks(T))
        return out

    def is_below(self, other: "LabelFamily") -> bool:
        """Pointwise inclusion of the represented (downward closed) families."""
        for s, family in self.sets.items():
            theirs = other.sets.get(s, ())
            for T in family:
                if not any(T & U == T for U in theirs):
                    return False
        return True

    def same_as(self, other: "LabelFamily") -> bool:
        return self.is_below(other) and other.is_below(self)

    def is_antichain(self) -> bool:
        for family in self.sets.values():
            for i, T in enumerate(family):
                for j, U in enumerate(family):
                    if i != j and T & U == T:
                        return False
        return True

    def dump_lines(self) -> List[str]:
        lines = []
        for s in sorted(self.sets):
            for T in sorted(self.sets[s], key=lambda m: sorted(bits(m))):
                lines.append(f"{s}: {' '.join(str(t) for t in sorted(bits(T)))}")
        return lines


# -------------------------------
# Leaves
# -------------------------------
def leaf_labels(ctx: TreeContext) -> Set[Tuple[int, int]]:
    alpha, beta = ctx.alpha.morphism, ctx.beta.morphism
    mul_m, mul_n = alpha.target.mul, beta.target.mul
    gens = [(alpha.image_of(a), beta.image_of(a)) for a in alpha.alphabet]
    start = (alpha.target.unit, beta.target.unit)
    seen = {start}
    queue = deque([start])
    while queue:
        s, t = queue.popleft()
        for (x, y) in gens:
            nxt = (int(mul_m[s, x]), int(mul_n[t, y]))
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return seen


# -------------------------------
# Antichain saturation
# -------------------------------
class _Antichains:
    def __init__(self, cap: int):
        self.sets: Dict[int, List[int]] = {}
        self.total = 0
        self.cap = cap
        self.changed = False

    def covers(self, s: int, T: int) -> bool:
        return any(T & U == T for U in self.sets.get(s, ()))

    def insert(self, s: int, T: int) -> bool:
        family = self.sets.setdefault(s, [])
        for U in family:
            if T & U == T:
                return False
        kept = [U for U in family if U & T != U]
        self.total += 1 - (len(family) - len(kept))
        kept.append(T)
        self.sets[s] = kept
        if self.total > self.cap:
            raise ResourceLimitError("stored label sets", self.cap)
        self.changed = True
        return True

    def items(self) -> List[Tuple[int, int]]:
        return [(s, T) for s in sorted(self.sets) for T in sorted(self.sets[s])]

    def frozen(self) -> Dict[int, Tuple[int, ...]]:
        return {s: tuple(sorted(v)) for s, v in sorted(self.sets.items()) if v}


def _class_filter(ctx: TreeContext):
    """Keeps, for each s, only the elements of N in the class of s."""
    masks = {}
    for c in set(ctx.alpha.class_of.tolist()):
        masks[c] = mask_of(t for t in range(ctx.N.size) if ctx.beta.class_of[t] == c)
    return lambda s, T: T & masks[int(ctx.alpha.class_of[s])]


def _product_closure(store: _Antichains, pending: deque, mul_m, algebra: SetAlgebra,
                     prune, deadline: Optional[float]):
    while pending:
        check_deadline(deadline)
        s1, T1 = pending.popleft()
        if T1 not in store.sets.get(s1, ()):
            continue  # evicted by a larger set, which is processed on its own
        for (s2, T2) in store.items():
            for (s, T) in ((mul_m[s1][s2], algebra.product(T1, T2)),
                           (mul_m[s2][s1], algebra.product(T2, T1))):
                if prune is not None:
                    T = prune(s, T)
                if T and store.insert(s, T):
                    pending.append((s, T))


def saturate(ctx: TreeContext, max_height: Optional[int] = None, prune: bool = False,
             cap: Optional[int] = None, deadline: Optional[float] = None) -> LabelFamily:
    """
    Root labels of trees with at most max_height S-operation nodes per
    branch (default: the J-depth of the basis monoid). Stops early at a
    fixpoint.
    """
    cap = cap or config.LABEL_CAP
    if max_height is None:
        max_height = ctx.alpha.basis.height(ctx.alpha.alphabet)
    if max_height < 0:
        raise ValueError("max_height must be non-negative")
    if prune and not ctx.alpha.basis.is_alphabet_testable():
        raise SeparationError("alphabet-safe pruning needs an at or at:... basis")
    pruner = _class_filter(ctx) if prune else None
    mul_m = ctx.M.mul.tolist()
    algebra = SetAlgebra(ctx.N.mul)
    store = _Antichains(cap)
    for (s, t) in sorted(leaf_labels(ctx)):
        store.insert(s, 1 << t)

    levels = [store.total]
    idempotent = [s for s in sorted(store.sets) if mul_m[s][s] == s]
    x_masks = {e: ctx.class_mask(e) for e in idempotent}
    height = 0
    for level in range(max_height):
        # leaves only multiply into leaves, so closing at level 0 adds nothing
        pending = deque()
        for e in idempotent:
            for E0 in list(store.sets.get(e, ())):
                E = algebra.omega(E0)
                T = algebra.product(algebra.product(E, x_masks[e]), E)
                if pruner is not None:
                    T = pruner(e, T)
                if T and not store.covers(e, T):
                    pending.append((e, T))
        store.changed = False
        for (e, T) in list(pending):
            store.insert(e, T)
        _product_closure(store, pending, mul_m, algebra, pruner, deadline)
        levels.append(store.total)
        if not store.changed:
            logger.debug(f"saturation reached a fixpoint after {level} S-operation levels")
            break
        height = level + 1
        logger.debug(f"saturation level {height}: {store.total} maximal label sets")
    stats = {"levels": levels, "height_bound": max_height, "height_used": height,
             "label_sets": store.total, "N": ctx.N.size}
    return LabelFamily(ctx, store.frozen(), height, stats)


# -------------------------------
# Naive oracle
# -------------------------------
def saturate_naive(ctx: TreeContext, cap: Optional[int] = None) -> Set[Tuple[int, int]]:
    """
    Least downward closed set of labels containing the leaves and closed under
    both rules, with the S-operation applied to exactly idempotent labels.
    Explicit representation, so only for small N.
    """
    cap = cap or config.NAIVE_MAX_N
    if ctx.N.size > cap:
        raise ResourceLimitError("naive saturation |N|", cap)
    mul_m = ctx.M.mul.tolist()
    algebra = SetAlgebra(ctx.N.mul)
    x_masks: Dict[int, int] = {}
    family: Set[Tuple[int, int]] = set()
    pending: deque = deque()

    def add(s: int, T: int):
        for sub in submasks(T):
            if (s, sub) not in family:
                family.add((s, sub))
                pending.append((s, sub))

    for (s, t) in leaf_labels(ctx):
        add(s, 1 << t)
    while pending:
        s1, T1 = pending.popleft()
        for (s2, T2) in list(family):
            add(mul_m[s1][s2], algebra.product(T1, T2))
            add(mul_m[s2][s1], algebra.product(T2, T1))
        if mul_m[s1][s1] == s1 and algebra.product(T1, T1) == T1:
            if s1 not in x_masks:
                x_masks[s1] = ctx.class_mask(s1)
            add(s1, algebra.product(algebra.product(T1, x_masks[s1]), T1))
    return family


# -------------------------------
# Alphabet-safe pruning
# -------------------------------
def alphabet_safe_prune(f: LabelFamily) -> LabelFamily:
    """
    Drops from every stored set the elements whose alphabet class differs from
    the class of s. A correctly saturated family comes back unchanged.
    """
    ctx = f.context
    if not ctx.alpha.basis.is_alphabet_testable():
        raise SeparationError("alphabet-safe pruning needs an at or at:... basis")
    keep = _class_filter(ctx)
    store = _Antichains(config.LABEL_CAP)
    removed = 0
    for s, family in f.sets.items():
        for T in family:
            pruned = keep(s, T)
            if pruned != T:
                removed += 1
            if pruned:
                store.insert(s, pruned)
    if removed:
        logger.warning(f"alphabet-safe pruning changed {removed} stored label sets")
    stats = dict(f.stats)
    stats["pruned_sets"] = removed
    return LabelFamily(ctx, store.frozen(), f.height, stats)
