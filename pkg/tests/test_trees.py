import random

import numpy as np
import pytest

from algebra import Basis, compatible_product, image, transition_monoid
import config
from corpus import exhaustive_contexts, full_product_context, random_contexts
from errors import ResourceLimitError, SeparationError
from trees import (
    SetAlgebra,
    TreeContext,
    alphabet_safe_prune,
    bits,
    leaf_labels,
    mask_of,
    saturate,
    saturate_naive,
    submasks,
)


@pytest.fixture(scope="module")
def contexts():
    everything = list(exhaustive_contexts())
    sample = random.Random(7).sample(everything, 80)
    return sample + random_contexts(11, 8)


@pytest.fixture
def at_context(regex):
    cm, _, _ = compatible_product(transition_monoid(regex("a [a,b]*")), transition_monoid(regex("b [a,b]*")),
                                  Basis("at"))
    return TreeContext(cm, cm, image(cm.morphism))


def test_bit_helpers():
    assert list(bits(0b10110)) == [1, 2, 4]
    assert mask_of([0, 3]) == 0b1001
    assert sorted(submasks(0b101)) == [0, 0b001, 0b100, 0b101]


def test_set_products_in_a_cyclic_group():
    ids = np.arange(4)
    algebra = SetAlgebra((ids[:, None] + ids[None, :]) % 4)
    assert algebra.product(mask_of([1]), mask_of([1, 2])) == mask_of([2, 3])
    assert algebra.product(0, mask_of([1])) == 0
    assert algebra.omega(mask_of([1])) == mask_of([0])
    assert algebra.omega(mask_of([0, 2])) == mask_of([0, 2])


def test_product_cache_respects_its_cap(monkeypatch):
    ids = np.arange(4)
    algebra = SetAlgebra((ids[:, None] + ids[None, :]) % 4)
    monkeypatch.setattr(config, "SET_CACHE_CAP", 1)
    algebra.product(mask_of([1]), mask_of([1]))
    algebra.product(mask_of([2]), mask_of([1, 3]))
    assert len(algebra._cache) == 1
    assert algebra.product(mask_of([2]), mask_of([1, 3])) == mask_of([1, 3])


def test_context_rejects_bad_subsets(at_context):
    cm = at_context.alpha
    with pytest.raises(SeparationError):
        TreeContext(cm, cm, {0})


def test_leaves_are_the_reachable_pairs(at_context):
    leaves = leaf_labels(at_context)
    # alpha = beta, so every leaf sits on the diagonal
    assert all(s == t for s, t in leaves)
    assert {s for s, _ in leaves} == image(at_context.alpha.morphism)


class TestSaturation:
    def test_matches_the_naive_fixpoint(self, contexts):
        for ctx in contexts:
            assert saturate(ctx).downward_closure() == saturate_naive(ctx)

    def test_height_bound_is_enough(self, contexts):
        for ctx in contexts:
            bound = ctx.alpha.basis.height(ctx.alpha.alphabet)
            assert saturate(ctx).same_as(saturate(ctx, max_height=bound + 3))

    def test_stored_sets_form_antichains(self, contexts, at_context):
        for ctx in contexts + [at_context]:
            assert saturate(ctx).is_antichain()

    def test_height_zero_only_multiplies_leaves(self, at_context):
        flat = saturate(at_context, max_height=0)
        full = saturate(at_context)
        assert flat.is_below(full)
        assert flat.stats["height_used"] == 0

    def test_more_s_gives_more_labels(self):
        contexts = full_product_context()
        assert contexts
        for small in contexts:
            for large in contexts:
                if large.beta is small.beta and small.S < large.S:
                    assert saturate(small).is_below(saturate(large))

    def test_stats(self, at_context):
        family = saturate(at_context)
        assert family.stats["height_bound"] == 3
        assert family.stats["label_sets"] == family.size()
        assert family.stats["N"] == at_context.N.size

    def test_label_cap(self, at_context):
        with pytest.raises(ResourceLimitError):
            saturate(at_context, cap=1)

    def test_naive_size_cap(self, at_context):
        with pytest.raises(ResourceLimitError):
            saturate_naive(at_context, cap=1)

    def test_dump_lines(self, at_context):
        lines = saturate(at_context).dump_lines()
        assert lines and all(":" in line for line in lines)


class TestPruning:
    def test_saturated_family_survives_pruning(self, at_context):
        family = saturate(at_context)
        pruned = alphabet_safe_prune(family)
        assert pruned.same_as(family)
        assert pruned.stats["pruned_sets"] == 0

    def test_pruned_saturation_agrees(self, at_context):
        assert saturate(at_context, prune=True).same_as(saturate(at_context))

    def test_needs_an_alphabet_testable_basis(self, contexts):
        triv = next(ctx for ctx in contexts if ctx.alpha.basis.kind == "triv")
        with pytest.raises(SeparationError):
            saturate(triv, prune=True)
        with pytest.raises(SeparationError):
            alphabet_safe_prune(saturate(triv))
