import random

import pytest

from automata import (
    Alphabet,
    Nfa,
    accepts,
    complement,
    compile_regex,
    concat,
    determinize,
    empty_nfa,
    epsilon_nfa,
    equivalent,
    format_regex,
    includes,
    intersect,
    is_empty,
    letters_nfa,
    minimize,
    parse_regex,
    parse_regex_ast,
    project,
    star,
    trim,
    union,
    universal_nfa,
    with_alphabet,
    word_nfa,
    words,
)
from corpus import random_nfa, random_regex
from errors import AlphabetMismatchError, RegexSyntaxError, ResourceLimitError, UnknownLetterError


class TestAlphabet:
    def test_duplicates_rejected(self):
        with pytest.raises(ValueError):
            Alphabet(("a", "a"))

    def test_index_and_membership(self, ab):
        assert ab.index("b") == 1
        assert "a" in ab and "c" not in ab
        with pytest.raises(UnknownLetterError):
            ab.index("c")

    def test_extended_keeps_order(self, ab):
        assert Alphabet.of("a", "b").extended(["0", "a", "1"]).letters == ("a", "b", "0", "1")
        assert ab.same_letters(Alphabet(("b", "a")))


class TestNfa:
    def test_state_out_of_range(self, ab):
        with pytest.raises(ValueError):
            Nfa(ab, 1, frozenset({(0, "a", 1)}), frozenset({0}), frozenset())

    def test_unknown_letter(self, ab):
        with pytest.raises(UnknownLetterError):
            Nfa(ab, 1, frozenset({(0, "c", 0)}), frozenset({0}), frozenset())

    def test_basic_languages(self, ab):
        assert is_empty(empty_nfa(ab))
        assert accepts(epsilon_nfa(ab), ()) and not accepts(epsilon_nfa(ab), ("a",))
        assert accepts(universal_nfa(ab), ("b", "a", "a"))
        assert accepts(word_nfa(ab, ("a", "b")), ("a", "b"))
        assert not accepts(word_nfa(ab, ("a", "b")), ("a",))
        assert accepts(letters_nfa(ab, ["b"]), ("b",))

    def test_accepts_rejects_foreign_letters(self, ab):
        with pytest.raises(UnknownLetterError):
            accepts(universal_nfa(ab), ("z",))

    def test_trim_drops_useless_states(self, ab):
        n = Nfa(ab, 4, frozenset({(0, "a", 1), (2, "b", 3)}), frozenset({0}), frozenset({1}))
        t = trim(n)
        assert t.state_count == 2
        assert equivalent(t, n)


class TestRegex:
    @pytest.mark.parametrize("text,inside,outside", [
        ("a [a,b]*", [("a",), ("a", "b", "b")], [(), ("b", "a")]),
        ("(a a)*", [(), ("a", "a")], [("a",), ("a", "b")]),
        ("a + b b", [("a",), ("b", "b")], [("b",), ("a", "b")]),
        ("_EPS_ + a*", [(), ("a", "a", "a")], [("b",)]),
        ("_EMPTY_", [], [(), ("a",)]),
    ])
    def test_language(self, regex, text, inside, outside):
        n = regex(text)
        for w in inside:
            assert accepts(n, w), w
        for w in outside:
            assert not accepts(n, w), w

    def test_longest_token_wins(self):
        alphabet = Alphabet(("h", "h1", "x1"))
        n = parse_regex("h1 x1 h", alphabet)
        assert accepts(n, ("h1", "x1", "h"))

    def test_quoted_letters(self):
        alphabet = Alphabet(("#", "$", "a"))
        n = parse_regex("'#' a* \"$\"", alphabet)
        assert accepts(n, ("#", "a", "a", "$"))

    @pytest.mark.parametrize("text", ["", "(a", "a +", "*a", "[a,", "a)"])
    def test_syntax_errors(self, ab, text):
        with pytest.raises(RegexSyntaxError):
            parse_regex(text, ab)

    def test_unknown_letter(self, ab):
        with pytest.raises(UnknownLetterError):
            parse_regex("a c", ab)

    def test_format_then_parse_keeps_language(self, ab, seed):
        rng = random.Random(seed)
        for _ in range(40):
            node = random_regex(rng, ab)
            again = parse_regex(format_regex(node), ab)
            assert equivalent(compile_regex(node, ab), again), format_regex(node)

    def test_format_quotes_special_letters(self):
        alphabet = Alphabet(("(", "a"))
        assert format_regex(parse_regex_ast("'(' a", alphabet)) == '"(" a'


class TestCombinators:
    def test_concat_star_union(self, ab, regex):
        a, b = letters_nfa(ab, ["a"]), letters_nfa(ab, ["b"])
        assert equivalent(concat(a, star(b)), regex("a b*"))
        assert equivalent(union(a, b), regex("[a,b]"))
        assert equivalent(star(union(a, b)), universal_nfa(ab))

    def test_concat_needs_same_alphabet(self, ab):
        with pytest.raises(AlphabetMismatchError):
            concat(letters_nfa(ab, ["a"]), epsilon_nfa(Alphabet(("a",))))

    def test_with_alphabet_and_project(self, ab):
        big = Alphabet(("a", "b", "c"))
        n = with_alphabet(word_nfa(ab, ("a", "b")), big)
        assert accepts(n, ("a", "b")) and not accepts(n, ("c",))
        p = project(n, {"a": "c", "b": "c"}, big)
        assert accepts(p, ("c", "c"))


class TestDecisions:
    def test_determinize_is_complete(self, ab, regex):
        d = determinize(regex("a [a,b]*"))
        assert len(d.initial) == 1
        for q in range(d.state_count):
            assert set(d.successors[q]) == {"a", "b"}
            assert all(len(rs) == 1 for rs in d.successors[q].values())

    def test_determinize_cap(self, ab, regex):
        with pytest.raises(ResourceLimitError):
            determinize(regex("[a,b]* a [a,b] [a,b] [a,b]"), cap=4)

    def test_complement_and_intersection(self, ab, regex):
        n = regex("a [a,b]*")
        co = complement(n)
        for w in words(ab, 4):
            assert accepts(co, w) != accepts(n, w)
        assert is_empty(intersect(n, co))

    def test_inclusion(self, regex):
        assert includes(regex("[a,b]*"), regex("a b*"))
        assert not includes(regex("a b*"), regex("[a,b]*"))

    def test_random_against_word_enumeration(self, ab, seed):
        rng = random.Random(seed)
        for _ in range(30):
            n1, n2 = random_nfa(rng, ab), random_nfa(rng, ab)
            both = intersect(n1, n2)
            expected = [w for w in words(ab, 4) if accepts(n1, w) and accepts(n2, w)]
            assert [w for w in words(ab, 4) if accepts(both, w)] == expected
            assert equivalent(determinize(n1), n1)

    def test_minimize(self, ab, regex):
        m = minimize(regex("a [a,b]*"))
        assert m.state_count == 3
        assert equivalent(m, regex("a [a,b]*"))
        assert minimize(regex("[a,b]* a + [a,b]* b + _EPS_")).state_count == 1
        assert minimize(regex("_EMPTY_")).state_count == 1

    def test_words_order(self, ab):
        assert list(words(ab, 1)) == [(), ("a",), ("b",)]


@pytest.mark.parametrize("i", range(50))
def test_double_complement(ab, seed, i):
    n = random_nfa(random.Random(seed + i), ab)
    assert equivalent(complement(complement(n)), n)
