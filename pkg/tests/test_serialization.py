import json
import os

import pytest

from automata import equivalent, parse_regex
from algebra import transition_monoid
from errors import InputFormatError, InvalidMonoidError, SeparationError
from reduction import cyclic_tagging
from separation import And, Certificate, Level, Not, PolTerm, verify_certificate
from serialization import (
    build_manifest,
    certificate_from_dict,
    certificate_to_dict,
    input_digest,
    load_certificate_file,
    load_input,
    load_tagging_file,
    morphism_from_dict,
    morphism_to_dict,
    nfa_from_dict,
    nfa_to_dict,
    tagging_to_dict,
    write_output,
)

ALL = frozenset(range(4))


def dump(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


class TestAutomata:
    def test_dict_keeps_the_language(self, regex):
        n = regex("a (a + b)* b")
        back = nfa_from_dict(nfa_to_dict(n))
        assert back.transitions == n.transitions
        assert equivalent(back, n)

    def test_transitions_are_sorted(self, regex):
        data = nfa_to_dict(regex("b + a"))
        assert data["transitions"] == sorted(data["transitions"], key=lambda t: (t[0], t[1], t[2]))

    @pytest.mark.parametrize("broken", [
        {"alphabet": ["a"], "states": 1, "initial": [0], "final": []},
        {"alphabet": ["a"], "states": 1, "initial": [3], "final": [], "transitions": []},
        {"alphabet": ["a"], "states": "two", "initial": [0], "final": [], "transitions": []},
    ])
    def test_broken(self, broken):
        with pytest.raises(InputFormatError):
            nfa_from_dict(broken)


class TestMorphisms:
    def test_dict_keeps_the_language(self, regex, ab):
        rl = transition_monoid(regex("(a + b)* a"))
        back = morphism_from_dict(morphism_to_dict(rl))
        assert back.accept == rl.accept
        assert back.morphism.letter_image == rl.morphism.letter_image
        for w in (("a",), ("a", "b"), ("b", "a"), ()):
            assert back.contains(w) == rl.contains(w)

    def test_shape_mismatch(self):
        with pytest.raises(InputFormatError):
            morphism_from_dict({"alphabet": ["a"], "size": 3, "unit": 0, "mul": [[0, 1], [1, 0]],
                                "letters": {"a": 1}})

    def test_letters_must_cover_the_alphabet(self):
        with pytest.raises(InputFormatError):
            morphism_from_dict({"alphabet": ["a", "b"], "size": 1, "unit": 0, "mul": [[0]],
                                "letters": {"a": 0}})

    def test_files_are_checked(self, tmp_path):
        path = dump(tmp_path, "bad.json", {"alphabet": ["a"], "size": 3, "unit": 0,
                                           "mul": [[0, 1, 2], [1, 2, 1], [2, 2, 1]], "letters": {"a": 1}})
        with pytest.raises(InvalidMonoidError):
            load_input(path)


def test_tagging_file(tmp_path):
    p = cyclic_tagging(3)
    back = load_tagging_file(dump(tmp_path, "tag.json", tagging_to_dict(p)))
    assert back.G == p.G and back.tags == p.tags
    assert back.tau.letter_image == p.tau.letter_image


class TestCertificates:
    def test_pol_dict(self, ab):
        c = Certificate(Level.parse("st-3/2"), ab, PolTerm(((frozenset({0}), "a", ALL),)))
        data = certificate_to_dict(c)
        assert data["products"] == [[[0], "a", [0, 1, 2, 3]]]
        assert certificate_from_dict(data).body == c.body

    def test_formula_dict(self, ab):
        body = And((Not(PolTerm(((ALL, "b", ALL),))), PolTerm(((ALL,),))))
        c = Certificate(Level.parse("st-2"), ab, body)
        back = certificate_from_dict(certificate_to_dict(c))
        assert back.level.desugar() == c.level.desugar()
        assert back.body == body

    @pytest.mark.parametrize("data", [
        {"alphabet": ["a"], "products": []},
        {"level": "st-9", "alphabet": ["a"], "products": []},
        {"level": "st-1/2", "alphabet": ["a"], "products": [[[0], "a"]]},
        {"level": "st-2", "alphabet": ["a"], "formula": {"op": "xor"}},
        {"level": "st-2", "alphabet": ["a"], "formula": {"op": "and", "args": []}},
    ])
    def test_malformed(self, data):
        with pytest.raises(InputFormatError):
            certificate_from_dict(data)

    def test_sample_files(self, data_dir, ab):
        a_then_any = load_input(os.path.join(data_dir, "instances", "a_then_any.json"))
        b_then_any = load_input(os.path.join(data_dir, "instances", "b_then_any.json"))
        for name in ("starts_with_a.json", "no_b.json"):
            c = load_certificate_file(os.path.join(data_dir, "certificates", name))
            c.validate()
        c = load_certificate_file(os.path.join(data_dir, "certificates", "starts_with_a.json"))
        assert verify_certificate(c, a_then_any, b_then_any)


class TestInputs:
    def test_regex_needs_an_alphabet(self):
        with pytest.raises(SeparationError):
            load_input("re:a b")

    def test_regex(self, ab):
        assert equivalent(load_input("re:a b*", ab), parse_regex("a b*", ab))

    def test_morphism_file(self, data_dir):
        rl = load_input(os.path.join(data_dir, "instances", "even_a.json"))
        assert rl.contains(("a", "b", "a")) and not rl.contains(("b", "a"))

    def test_unknown_object(self, tmp_path):
        with pytest.raises(InputFormatError):
            load_input(dump(tmp_path, "x.json", {"hello": 1}))

    def test_not_json(self, tmp_path):
        path = tmp_path / "x.json"
        path.write_text("{", encoding="utf-8")
        with pytest.raises(InputFormatError):
            load_input(str(path))

    def test_json_list(self, tmp_path):
        with pytest.raises(InputFormatError):
            load_input(dump(tmp_path, "x.json", [1, 2]))


class TestOutputs:
    def test_manifest(self, tmp_path):
        path = dump(tmp_path, "n.json", {"a": 1})
        manifest = build_manifest("separate", [path, "re:a"], 7, level="st-1", strategy=None)
        assert manifest["seed"] == 7 and manifest["level"] == "st-1"
        assert "strategy" not in manifest
        assert manifest["inputs"][0]["sha256"] == input_digest(path)
        assert input_digest("re:a") != input_digest("re:b")

    def test_write_output_is_deterministic(self, tmp_path):
        manifest = build_manifest("member", ["re:a"], 1)
        first = write_output(str(tmp_path / "out" / "one.json"), {"b": 2, "a": 1}, manifest)
        second = write_output(str(tmp_path / "out" / "two.json"), {"a": 1, "b": 2}, manifest)
        with open(first, encoding="utf-8") as f1, open(second, encoding="utf-8") as f2:
            text = f1.read()
            assert text == f2.read()
        data = json.loads(text)
        assert data["manifest"]["command"] == "member" and data["a"] == 1
