"""
serialization.py
----------------
JSON formats for automata, morphisms, taggings and certificates, input
loading for the CLI, and output files carrying a reproducibility manifest.
"""
import hashlib
import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np

from algebra import Basis, Monoid, Morphism, RecognizedLanguage, check_associativity
from automata import Alphabet, Nfa, parse_regex
import config
from errors import InputFormatError, SeparationError
from reduction import Tagging
from separation import And, Certificate, Level, Not, Or, PolTerm

logger = logging.getLogger(__name__)

REGEX_PREFIX = "re:"


def _read_json(path: str) -> Dict[str, Any]:
    with open(path, "r", encoding="utf-8") as f:
        try:
            data = json.load(f)
        except json.JSONDecodeError as e:
            raise InputFormatError(f"{path} is not valid JSON: {e}")
    if not isinstance(data, dict):
        raise InputFormatError(f"{path} must hold a JSON object")
    return data


def _field(data: Dict[str, Any], key: str, where: str):
    if key not in data:
        raise InputFormatError(f"{where}: missing field {key!r}")
    return data[key]


# -------------------------------
# Automata
# -------------------------------
def nfa_to_dict(n: Nfa) -> Dict[str, Any]:
    return {
        "alphabet": list(n.alphabet),
        "states": n.state_count,
        "initial": sorted(n.initial),
        "final": sorted(n.final),
        "transitions": [[p, a, r] for (p, a, r) in n.sorted_transitions()],
    }


def nfa_from_dict(data: Dict[str, Any], where: str = "nfa") -> Nfa:
    try:
        alphabet = Alphabet(tuple(_field(data, "alphabet", where)))
        return Nfa(
            alphabet,
            int(_field(data, "states", where)),
            frozenset((int(p), str(a), int(r)) for p, a, r in _field(data, "transitions", where)),
            frozenset(int(q) for q in _field(data, "initial", where)),
            frozenset(int(q) for q in _field(data, "final", where)),
        )
    except (TypeError, ValueError) as e:
        raise InputFormatError(f"{where}: {e}")


# -------------------------------
# Morphisms
# -------------------------------
def morphism_to_dict(rl: RecognizedLanguage) -> Dict[str, Any]:
    m = rl.morphism
    return {
        "alphabet": list(m.alphabet),
        "size": m.target.size,
        "unit": m.target.unit,
        "mul": m.target.mul.tolist(),
        "letters": {a: x for a, x in zip(m.alphabet, m.letter_image)},
        "accept": sorted(rl.accept),
    }


def morphism_from_dict(data: Dict[str, Any], where: str = "morphism") -> RecognizedLanguage:
    try:
        alphabet = Alphabet(tuple(_field(data, "alphabet", where)))
        mul = np.array(_field(data, "mul", where), dtype=np.int64)
        size = int(_field(data, "size", where))
        if mul.shape != (size, size):
            raise InputFormatError(f"{where}: table shape {mul.shape} does not match size {size}")
        monoid = Monoid(mul, int(_field(data, "unit", where)))
        letters = _field(data, "letters", where)
        if set(letters) != set(alphabet):
            raise InputFormatError(f"{where}: letter images must cover exactly the alphabet")
        morphism = Morphism(alphabet, monoid, tuple(int(letters[a]) for a in alphabet))
        return RecognizedLanguage(morphism, frozenset(data.get("accept", [])))
    except (TypeError, ValueError) as e:
        raise InputFormatError(f"{where}: {e}")


def load_morphism_file(path: str) -> RecognizedLanguage:
    """User-supplied monoids are checked: two-sided unit and associativity."""
    rl = morphism_from_dict(_read_json(path), path)
    rl.morphism.target.check_unit()
    check_associativity(rl.morphism.target)
    return rl


def load_nfa_file(path: str) -> Nfa:
    return nfa_from_dict(_read_json(path), path)


# -------------------------------
# Taggings
# -------------------------------
def tagging_to_dict(p: Tagging) -> Dict[str, Any]:
    tau = p.tau
    return {
        "alphabet": list(tau.alphabet),
        "size": tau.target.size,
        "unit": tau.target.unit,
        "mul": tau.target.mul.tolist(),
        "letters": {a: x for a, x in zip(tau.alphabet, tau.letter_image)},
        "G": list(p.G),
    }


def tagging_from_dict(data: Dict[str, Any], where: str = "tagging") -> Tagging:
    rl = morphism_from_dict(data, where)
    rl.morphism.target.check_unit()
    check_associativity(rl.morphism.target)
    return Tagging(rl.morphism, tuple(_field(data, "G", where)))


def load_tagging_file(path: str) -> Tagging:
    return tagging_from_dict(_read_json(path), path)


# -------------------------------
# Certificates
# -------------------------------
def _products_from_json(products: List, where: str):
    out = []
    for product in products:
        if not isinstance(product, list) or len(product) % 2 != 1:
            raise InputFormatError(f"{where}: a product alternates blocks and letters")
        out.append(tuple(frozenset(int(c) for c in part) if k % 2 == 0 else str(part)
                         for k, part in enumerate(product)))
    return PolTerm(tuple(out))


def _products_to_json(term: PolTerm) -> List:
    return [[sorted(part) if k % 2 == 0 else part for k, part in enumerate(product)]
            for product in term.products]


def _formula_from_json(node: Dict[str, Any], where: str):
    op = node.get("op")
    if op == "pol":
        return _products_from_json(node.get("products", []), where)
    if op == "not":
        return Not(_formula_from_json(_field(node, "arg", where), where))
    if op in ("and", "or"):
        args = tuple(_formula_from_json(a, where) for a in _field(node, "args", where))
        if not args:
            raise InputFormatError(f"{where}: {op} needs at least one argument")
        return And(args) if op == "and" else Or(args)
    raise InputFormatError(f"{where}: unknown formula node {op!r}")


def _formula_to_json(node) -> Dict[str, Any]:
    if isinstance(node, PolTerm):
        return {"op": "pol", "products": _products_to_json(node)}
    if isinstance(node, Not):
        return {"op": "not", "arg": _formula_to_json(node.arg)}
    if isinstance(node, And):
        return {"op": "and", "args": [_formula_to_json(a) for a in node.args]}
    return {"op": "or", "args": [_formula_to_json(a) for a in node.args]}


def certificate_from_dict(data: Dict[str, Any], where: str = "certificate") -> Certificate:
    basis = Basis.parse(data["basis"]) if "basis" in data else None
    try:
        level = Level.parse(str(_field(data, "level", where)), basis)
    except ValueError as e:
        raise InputFormatError(f"{where}: {e}")
    alphabet = Alphabet(tuple(_field(data, "alphabet", where)))
    if level.op == "pol":
        body = _products_from_json(_field(data, "products", where), where)
    else:
        body = _formula_from_json(_field(data, "formula", where), where)
    return Certificate(level, alphabet, body)


def certificate_to_dict(c: Certificate) -> Dict[str, Any]:
    out: Dict[str, Any] = {"level": c.level.name if c.level.name.startswith("st-") else c.level.op,
                           "basis": c.level.basis.name, "alphabet": list(c.alphabet)}
    if isinstance(c.body, PolTerm) and c.level.op == "pol":
        out["products"] = _products_to_json(c.body)
    else:
        out["formula"] = _formula_to_json(c.body)
    return out


def load_certificate_file(path: str) -> Certificate:
    return certificate_from_dict(_read_json(path), path)


# -------------------------------
# CLI inputs and outputs
# -------------------------------
def load_input(source: str, alphabet: Optional[Alphabet] = None):
    """An NFA file, a morphism file, or 're:<expression>' over the given alphabet."""
    if source.startswith(REGEX_PREFIX):
        if alphabet is None:
            raise SeparationError("regular expression inputs need --alphabet")
        return parse_regex(source[len(REGEX_PREFIX):], alphabet)
    data = _read_json(source)
    if "states" in data:
        return nfa_from_dict(data, source)
    if "mul" in data:
        return load_morphism_file(source)
    raise InputFormatError(f"{source}: neither an automaton nor a morphism file")


def input_digest(source: str) -> str:
    digest = hashlib.sha256()
    if source.startswith(REGEX_PREFIX) or not os.path.exists(source):
        digest.update(source.encode("utf-8"))
    else:
        with open(source, "rb") as f:
            for chunk in iter(lambda: f.read(65536), b""):
                digest.update(chunk)
    return digest.hexdigest()


def build_manifest(command: str, inputs: List[str], seed: int, **extra) -> Dict[str, Any]:
    manifest = {
        "tool_version": config.TOOL_VERSION,
        "command": command,
        "seed": seed,
        "caps": {"monoid": config.MONOID_CAP, "determinization": config.DET_CAP, "labels": config.LABEL_CAP,
                 "table_cells": config.TABLE_CELL_CAP, "wall_time": config.WALL_TIME},
        "inputs": [{"input": source, "sha256": input_digest(source)} for source in inputs],
    }
    manifest.update({k: v for k, v in extra.items() if v is not None})
    return manifest


def write_output(path: str, payload: Dict[str, Any], manifest: Dict[str, Any]) -> str:
    out_path = Path(path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with open(out_path, "w", encoding="utf-8") as f:
        json.dump({"manifest": manifest, **payload}, f, ensure_ascii=False, indent=2, sort_keys=True)
        f.write("\n")
    logger.info(f"Wrote {out_path}")
    return str(out_path)
