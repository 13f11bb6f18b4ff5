import random

import pytest

from algebra import Basis, compatible_product, transition_monoid
from automata import Alphabet, accepts, equivalent, parse_regex, words
from corpus import random_nfa
from errors import AlphabetMismatchError, CertificateError
from separation import (
    And,
    Certificate,
    Level,
    Not,
    PolTerm,
    Verdict,
    bpol_separates,
    certificate_to_nfa,
    is_member,
    pol_separates,
    st_separates,
    verify_certificate,
)

ALL = frozenset(range(4))
ST_LEVELS = ("st-1/2", "st-1", "st-3/2", "st-2")


class TestLevel:
    @pytest.mark.parametrize("text,op,basis", [
        ("st-1/2", "pol", "triv"),
        ("st-1", "bpol", "triv"),
        ("ST-3/2", "pol", "at"),
        ("st-2", "bpol", "at"),
    ])
    def test_straubing_therien_levels(self, text, op, basis):
        level = Level.parse(text)
        assert level.desugar() == (op, Basis(basis))

    def test_pol_with_basis(self):
        level = Level.parse("bpol", Basis.parse("at:a"))
        assert level.op == "bpol" and level.name == "bpol(at:a)"
        assert Level.parse("pol").basis == Basis("triv")

    @pytest.mark.parametrize("text", ["st-5/2", "dd", ""])
    def test_unknown(self, text):
        with pytest.raises(ValueError):
            Level.parse(text)

    def test_fixed_basis(self):
        with pytest.raises(ValueError):
            Level.parse("st-2", Basis("triv"))


def test_verdict_needs_witnesses_exactly_when_inseparable():
    with pytest.raises(AssertionError):
        Verdict(True, [(0, 1)])
    with pytest.raises(AssertionError):
        Verdict(False, [])


@pytest.mark.parametrize("left,right,expected", [
    ("a [a,b]*", "b [a,b]*", (False, False, True, True)),
    ("a b", "a", (True, True, True, True)),
    ("a", "a b", (False, True, True, True)),
    ("(a a)*", "a (a a)*", (False, False, False, False)),
    ("a [a,b]*", "a [a,b]*", (False, False, False, False)),
    ("b* a b*", "b*", (True, True, True, True)),
])
def test_known_verdicts(regex, left, right, expected):
    got = tuple(st_separates(Level.parse(level), regex(left), regex(right)).separable for level in ST_LEVELS)
    assert got == expected


def test_inseparable_verdict_reports_witnesses(regex):
    verdict = st_separates(Level.parse("st-1/2"), regex("a [a,b]*"), regex("b [a,b]*"))
    assert verdict.witnesses
    assert verdict.level == "st-1/2" and verdict.strategy == "tm"
    out = verdict.to_dict()
    assert out["separable"] is False and out["witnesses"]


def test_alphabets_must_match(regex):
    other = Alphabet(("a", "c"))
    with pytest.raises(AlphabetMismatchError):
        st_separates(Level.parse("st-1/2"), regex("a"), parse_regex("c", other))


def test_unknown_strategy(regex):
    with pytest.raises(ValueError):
        st_separates(Level.parse("st-1"), regex("a"), regex("b"), strategy="guess")


class TestDeciders:
    def test_pol_stats(self, regex):
        cm, F0, F1 = compatible_product(transition_monoid(regex("a b")), transition_monoid(regex("a")),
                                        Basis("triv"))
        verdict = pol_separates(cm, F0, F1)
        assert verdict.separable
        assert verdict.stats["saturation"]["height_bound"] == 1

    def test_red_chain_shrinks_to_a_fixpoint(self, regex):
        cm, F0, F1 = compatible_product(transition_monoid(regex("(a a)*")), transition_monoid(regex("a (a a)*")),
                                        Basis("at"))
        verdict = bpol_separates(cm, F0, F1)
        chain = verdict.stats["red_chain"]
        assert chain == sorted(set(chain), reverse=True)
        assert verdict.stats["fixpoint_size"] == chain[-1]
        assert not verdict.separable

    def test_morphism_inputs_are_used_directly(self, regex):
        l1, l2 = transition_monoid(regex("a b")), transition_monoid(regex("a"))
        verdict = st_separates(Level.parse("st-1"), l1, l2)
        assert verdict.separable and verdict.strategy == "direct"


class TestTaggingStrategy:
    @pytest.mark.parametrize("level", ["st-1/2", "st-1"])
    def test_agrees_with_transition_monoids(self, regex, level):
        for left, right in (("a", "b"), ("a", "a"), ("a b", "a")):
            tm = st_separates(Level.parse(level), regex(left), regex(right), "tm")
            tag = st_separates(Level.parse(level), regex(left), regex(right), "tag")
            assert tm.separable == tag.separable, (left, right)

    def test_both(self, regex):
        verdict = st_separates(Level.parse("st-1/2"), regex("a"), regex("b"), "both")
        assert verdict.separable and verdict.strategy == "both"
        assert "tag" in verdict.stats

    @pytest.mark.slow
    def test_level_three_halves(self, regex):
        tm = st_separates(Level.parse("st-3/2"), regex("a [a,b]*"), regex("b [a,b]*"), "tm")
        tag = st_separates(Level.parse("st-3/2"), regex("a [a,b]*"), regex("b [a,b]*"), "tag")
        assert tm.separable and tag.separable


class TestMembership:
    @pytest.mark.parametrize("text,level,member", [
        ("[a,b]* a [a,b]*", "st-1/2", True),
        ("a [a,b]*", "st-1/2", False),
        ("a [a,b]*", "st-3/2", True),
        ("b*", "st-1", True),
        ("(a a)*", "st-2", False),
        ("[a,b]*", "st-1/2", True),
    ])
    def test_is_member(self, regex, text, level, member):
        verdict = is_member(Level.parse(level), regex(text))
        assert verdict.separable == member
        assert verdict.strategy == "member"

    def test_morphism_input(self, regex):
        assert is_member(Level.parse("st-1"), transition_monoid(regex("b*"))).separable


class TestCertificates:
    def cert(self, ab, body, level="st-3/2"):
        return Certificate(Level.parse(level), ab, body)

    def test_starts_with_a(self, ab, regex):
        c = self.cert(ab, PolTerm(((frozenset({0}), "a", ALL),)))
        assert equivalent(certificate_to_nfa(c), regex("a [a,b]*"))
        assert verify_certificate(c, regex("a [a,b]*"), regex("b [a,b]*"))
        assert not verify_certificate(c, regex("b [a,b]*"), regex("a [a,b]*"))

    def test_boolean_combination(self, ab, regex):
        contains_b = PolTerm(((ALL, "b", ALL),))
        c = self.cert(ab, Not(contains_b), level="st-2")
        K = certificate_to_nfa(c)
        for w in words(ab, 4):
            assert accepts(K, w) == ("b" not in w)
        assert verify_certificate(c, regex("a*"), regex("[a,b]* b"))

    def test_universal_against_empty(self, ab, regex):
        c = self.cert(ab, PolTerm(((ALL,),)))
        assert verify_certificate(c, regex("[a,b]*"), regex("_EMPTY_"))

    @pytest.mark.parametrize("body", [
        PolTerm(((ALL, "c", ALL),)),
        PolTerm(((frozenset({9}),),)),
        PolTerm(((ALL, "a"),)),
    ])
    def test_malformed_products(self, ab, body):
        with pytest.raises(CertificateError):
            self.cert(ab, body).validate()

    def test_pol_certificate_must_be_a_union_of_products(self, ab):
        with pytest.raises(CertificateError):
            self.cert(ab, Not(PolTerm(((ALL,),)))).validate()

    def test_empty_conjunction(self, ab):
        with pytest.raises(CertificateError):
            self.cert(ab, And(()), level="st-2").validate()

    def test_alphabet_mismatch(self, ab, regex):
        c = Certificate(Level.parse("st-1/2"), Alphabet(("a",)), PolTerm(((frozenset({0}),),)))
        with pytest.raises(AlphabetMismatchError):
            verify_certificate(c, regex("a"), regex("b"))


@pytest.mark.parametrize("i", range(20))
@pytest.mark.parametrize("level", ["st-1", "st-2"])
def test_bpol_is_symmetric(ab, seed, i, level):
    rng = random.Random(seed + i)
    n1, n2 = random_nfa(rng, ab, 2), random_nfa(rng, ab, 2)
    l1, l2 = transition_monoid(n1), transition_monoid(n2)
    basis = Level.parse(level).basis
    cm, F0, F1 = compatible_product(l1, l2, basis)
    swapped, G0, G1 = compatible_product(l2, l1, basis)
    separable = bpol_separates(cm, F0, F1).separable
    assert bpol_separates(swapped, G0, G1).separable == separable
    assert bpol_separates(cm, F1, F0).separable == separable
