"""
cli.py
------
Command-line entry point:

- separate: is L1 separable from L2 at a level?
- member:   does L belong to a level?
- monoid:   export a transition monoid (or a basis) with its stats
- reduce:   build the tagged language of an automaton
- qbf:      generate or check the formula languages
- certify:  check a separator certificate against two automata
- selftest: run the acceptance suites
- bench:    time the deciders on growing random inputs (CSV)

Exit codes: 0 separable / valid / pass, 3 inseparable / invalid / fail,
1 usage or input error, 2 resource cap or wall-time budget exceeded.
"""
import argparse
import json
import logging
import os
import random
import sys
import time
from typing import Any, Dict, List, Optional

import pandas as pd
from colorama import Fore, init

from acceptance import SUITES, run_suites, summary_frame
from algebra import (
    Basis,
    RecognizedLanguage,
    canonical_basis_morphism,
    idempotents,
    j_depth,
    transition_monoid,
)
from automata import Alphabet, Nfa, minimize
import config
from corpus import random_nfa_pairs
from errors import ResourceLimitError, SeparationError, deadline_after
from hardness import build_qbf_languages, check_qbf_reduction, parse_qdimacs, print_qdimacs
from reduction import build_artifacts, cyclic_tagging
from separation import STRATEGIES, Level, is_member, st_separates, verify_certificate
from serialization import (
    build_manifest,
    load_certificate_file,
    load_input,
    load_tagging_file,
    morphism_to_dict,
    nfa_to_dict,
    write_output,
)

init(autoreset=True)
logger = logging.getLogger(__name__)

EXIT_OK, EXIT_USAGE, EXIT_LIMIT, EXIT_NEGATIVE = 0, 1, 2, 3


# -------------------------------
# Helpers
# -------------------------------
def _alphabet(args) -> Optional[Alphabet]:
    if not getattr(args, "alphabet", None):
        return None
    return Alphabet(tuple(a.strip() for a in args.alphabet.split(",") if a.strip()))


def _level(args) -> Level:
    basis = Basis.parse(args.basis) if args.basis else None
    try:
        return Level.parse(args.level, basis)
    except ValueError as e:
        raise SeparationError(str(e))


def _as_nfa(language, what: str) -> Nfa:
    if not isinstance(language, Nfa):
        raise SeparationError(f"{what} must be an automaton or a regular expression, not a morphism file")
    return language


def _out_path(args, default_name: str) -> str:
    return args.out or os.path.join(config.OUTPUT_DIR, default_name)


def _emit(args, payload: Dict[str, Any], manifest: Dict[str, Any], default_name: str) -> str:
    path = write_output(_out_path(args, default_name), payload, manifest)
    if args.format == "json":
        print(json.dumps({"manifest": manifest, **payload}, ensure_ascii=False, indent=2, sort_keys=True))
    return path


def _print_verdict(verdict, path: str):
    colour = Fore.GREEN if verdict.separable else Fore.YELLOW
    word = "SEPARABLE" if verdict.separable else "NOT SEPARABLE"
    print(colour + f"{word} at {verdict.level} (strategy {verdict.strategy})")
    for s0, s1 in verdict.witnesses[:5]:
        print(Fore.WHITE + f"  witness pair ({s0}, {s1})")
    if len(verdict.witnesses) > 5:
        print(Fore.WHITE + f"  ... {len(verdict.witnesses) - 5} more")
    print(Fore.BLUE + f"Result written to {path}")


# -------------------------------
# Commands
# -------------------------------
def cmd_separate(args) -> int:
    level = _level(args)
    alphabet = _alphabet(args)
    l1, l2 = load_input(args.first, alphabet), load_input(args.second, alphabet)
    verdict = st_separates(level, l1, l2, args.strategy, deadline=deadline_after(args.wall_time))
    manifest = build_manifest("separate", [args.first, args.second], args.seed,
                              level=level.name, basis=level.basis.name, strategy=verdict.strategy)
    path = _emit(args, {"verdict": verdict.to_dict()}, manifest, "verdict.json")
    if args.format == "text":
        _print_verdict(verdict, path)
    return EXIT_OK if verdict.separable else EXIT_NEGATIVE


def cmd_member(args) -> int:
    level = _level(args)
    language = load_input(args.input, _alphabet(args))
    verdict = is_member(level, language, deadline=deadline_after(args.wall_time))
    manifest = build_manifest("member", [args.input], args.seed, level=level.name, basis=level.basis.name)
    path = _emit(args, {"member": verdict.separable, "verdict": verdict.to_dict()}, manifest, "member.json")
    if args.format == "text":
        colour = Fore.GREEN if verdict.separable else Fore.YELLOW
        print(colour + f"{'MEMBER' if verdict.separable else 'NOT A MEMBER'} of {level.name}")
        print(Fore.BLUE + f"Result written to {path}")
    return EXIT_OK if verdict.separable else EXIT_NEGATIVE


def cmd_monoid(args) -> int:
    alphabet = _alphabet(args)
    if args.input:
        language = load_input(args.input, alphabet)
        if args.minimize and isinstance(language, Nfa):
            language = minimize(language, deadline=deadline_after(args.wall_time))
        rl = language if isinstance(language, RecognizedLanguage) else transition_monoid(
            language, deadline=deadline_after(args.wall_time))
        inputs = [args.input]
    else:
        if not args.basis or alphabet is None:
            raise SeparationError("monoid needs an input, or --basis together with --alphabet")
        rl = RecognizedLanguage(canonical_basis_morphism(Basis.parse(args.basis), alphabet))
        inputs = []
    m = rl.morphism
    stats = {
        "size": m.target.size,
        "idempotents": len(idempotents(m.target)),
        "j_depth": j_depth(m.target, m.letter_image),
    }
    manifest = build_manifest("monoid", inputs, args.seed, basis=args.basis)
    path = _emit(args, {"morphism": morphism_to_dict(rl), "stats": stats}, manifest, "monoid.json")
    if args.format == "text":
        print(Fore.CYAN + f"Monoid: {stats['size']} elements, {stats['idempotents']} idempotents, "
                          f"J-depth {stats['j_depth']}")
        print(Fore.BLUE + f"Morphism written to {path}")
    return EXIT_OK


def cmd_reduce(args) -> int:
    n = _as_nfa(load_input(args.input, _alphabet(args)), "reduce input")
    if args.tagging:
        tagging = load_tagging_file(args.tagging)
    else:
        tagging = cyclic_tagging(args.k or max(n.transition_count, 1))
    artifacts = build_artifacts(n, tagging)
    payload = {
        "relabeled": nfa_to_dict(artifacts.relabeled),
        "language_nfa": nfa_to_dict(artifacts.language_nfa),
        "language_monoid": morphism_to_dict(artifacts.language_monoid),
        "transition_order": [list(t) for t in artifacts.transition_order],
        "size_bound": artifacts.size_bound,
        "stats": artifacts.stats,
    }
    inputs = [args.input] + ([args.tagging] if args.tagging else [])
    manifest = build_manifest("reduce", inputs, args.seed, tagging_size=tagging.size, tagging_rank=tagging.rank)
    path = _emit(args, payload, manifest, "reduction.json")
    if args.format == "text":
        print(Fore.CYAN + f"Tagged language: {artifacts.language_nfa.state_count} states, monoid of "
                          f"{artifacts.stats['monoid']} elements (bound {artifacts.size_bound})")
        print(Fore.BLUE + f"Artifacts written to {path}")
    return EXIT_OK


def _read_qbf(path: str):
    with open(path, "r", encoding="utf-8") as f:
        return parse_qdimacs(f.read())


def cmd_qbf(args) -> int:
    if args.action == "gen":
        q = _read_qbf(args.files[0])
        instance = build_qbf_languages(q)
        payload = {"L": nfa_to_dict(instance.L), "Lprime": nfa_to_dict(instance.Lprime),
                   "instance": instance.manifest, "qdimacs": print_qdimacs(q)}
        manifest = build_manifest("qbf gen", args.files[:1], args.seed)
        path = _emit(args, payload, manifest, "qbf_instance.json")
        if args.format == "text":
            print(Fore.CYAN + f"Formula {q.describe()}: L has {instance.L.state_count} states, "
                              f"L' has {instance.Lprime.state_count}")
            print(Fore.BLUE + f"Languages written to {path}")
        return EXIT_OK

    results = []
    for path in args.files:
        try:
            outcome = check_qbf_reduction(_read_qbf(path), budget=args.wall_time, strategy=args.strategy)
        except SeparationError as e:
            logger.exception(f"Failed to check {path}: {e}")
            outcome = {"status": "ERROR", "reason": str(e)}
        outcome.pop("seconds", None)
        outcome["file"] = path
        results.append(outcome)
        colour = {"PASS": Fore.GREEN, "SKIPPED": Fore.YELLOW}.get(outcome["status"], Fore.RED)
        if args.format == "text":
            print(colour + f"{outcome['status']}: {path}")
    manifest = build_manifest("qbf check", args.files, args.seed, strategy=args.strategy)
    out = _emit(args, {"results": results}, manifest, "qbf_check.json")
    if args.format == "text":
        print(Fore.BLUE + f"Report written to {out}")
    if any(r["status"] == "ERROR" for r in results):
        return EXIT_USAGE
    return EXIT_NEGATIVE if any(r["status"] == "FAIL" for r in results) else EXIT_OK


def cmd_certify(args) -> int:
    c = load_certificate_file(args.certificate)
    n1 = _as_nfa(load_input(args.first, c.alphabet), "first input")
    n2 = _as_nfa(load_input(args.second, c.alphabet), "second input")
    valid = verify_certificate(c, n1, n2, deadline=deadline_after(args.wall_time))
    manifest = build_manifest("certify", [args.certificate, args.first, args.second], args.seed,
                              level=c.level.name)
    path = _emit(args, {"valid": valid}, manifest, "certificate.json")
    if args.format == "text":
        print((Fore.GREEN + "VALID" if valid else Fore.RED + "INVALID") + f" separator at {c.level.name}")
        print(Fore.BLUE + f"Result written to {path}")
    return EXIT_OK if valid else EXIT_NEGATIVE


def cmd_selftest(args) -> int:
    reports = run_suites(args.suite, args.seed, quick=args.quick)
    table = summary_frame(reports)
    manifest = build_manifest("selftest", [], args.seed, suites=[r["suite"] for r in reports], quick=args.quick)
    path = _emit(args, {"reports": reports}, manifest, "selftest.json")
    if args.format == "text":
        print(Fore.CYAN + table.to_string(index=False))
        for r in reports:
            for failure in r["failures"]:
                print(Fore.RED + f"[{r['suite']}] {failure['case']}: {failure['detail']}")
        print(Fore.BLUE + f"Report written to {path}")
    return EXIT_NEGATIVE if table["failed"].sum() else EXIT_OK


def cmd_bench(args) -> int:
    """Times separation at every ST level on random pairs of growing automata."""
    rows: List[Dict[str, Any]] = []
    rng = random.Random(args.seed)
    for states in range(1, args.max_states + 1):
        for n1, n2 in random_nfa_pairs(rng, args.count, max_states=states):
            for name in args.levels.split(","):
                started = time.perf_counter()
                row = {"max_states": states, "level": name, "states_1": n1.state_count,
                       "states_2": n2.state_count}
                try:
                    verdict = st_separates(Level.parse(name), n1, n2, args.strategy,
                                           deadline=deadline_after(args.wall_time))
                    row.update(separable=verdict.separable, monoid=verdict.stats.get("monoid"), status="ok")
                except ResourceLimitError as e:
                    row.update(separable=None, monoid=None, status=f"skipped: {e}")
                row["seconds"] = round(time.perf_counter() - started, 4)
                rows.append(row)
    df = pd.DataFrame(rows)
    out = args.out or os.path.join(config.OUTPUT_DIR, "bench.csv")
    os.makedirs(os.path.dirname(out) or ".", exist_ok=True)
    df.to_csv(out, index=False)
    logger.info(f"Wrote {len(df)} benchmark rows to {out}")
    if args.format == "text":
        summary = df.groupby(["max_states", "level"])["seconds"].agg(["mean", "max"]).reset_index()
        print(Fore.CYAN + summary.to_string(index=False))
        print(Fore.BLUE + f"CSV written to {out}")
    return EXIT_OK


# -------------------------------
# Argument parsing
# -------------------------------
class UsageParser(argparse.ArgumentParser):
    """Usage errors exit with EXIT_USAGE."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(Fore.RED + f"Error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _positive(text: str) -> int:
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--level", default="st-1/2", help="st-1/2, st-1, st-3/2, st-2, pol or bpol")
    common.add_argument("--basis", default=None, help="triv, at, at:a,b or user:PATH")
    common.add_argument("--strategy", choices=STRATEGIES, default="tm", help="transition monoids, tagging, or both")
    common.add_argument("--alphabet", default=None, help="comma separated letters for re: inputs")
    common.add_argument("--cap-monoid", type=_positive, default=None, help="largest monoid built")
    common.add_argument("--cap-det", type=_positive, default=None, help="largest subset construction")
    common.add_argument("--wall-time", type=float, default=None, help="seconds per decision (0 = none)")
    common.add_argument("--seed", type=int, default=config.DEFAULT_SEED)
    common.add_argument("--out", default=None, help=f"output file (default under {config.OUTPUT_DIR})")
    common.add_argument("--format", choices=("json", "text"), default="text")

    parser = UsageParser(description="Separation by low levels of concatenation hierarchies")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("separate", parents=[common], help="decide separability of two languages")
    p.add_argument("first", help="NFA file, morphism file or re:EXPR")
    p.add_argument("second", help="NFA file, morphism file or re:EXPR")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("member", parents=[common], help="decide membership of a language")
    p.add_argument("input")
    p.set_defaults(func=cmd_member)

    p = sub.add_parser("monoid", parents=[common], help="export a transition monoid or basis morphism")
    p.add_argument("input", nargs="?")
    p.add_argument("--minimize", action="store_true", help="minimal DFA first (syntactic monoid)")
    p.set_defaults(func=cmd_monoid)

    p = sub.add_parser("reduce", parents=[common], help="tagged language of an automaton")
    p.add_argument("input")
    p.add_argument("--tagging", default=None, help="tagging JSON file (default: cyclic)")
    p.add_argument("--k", type=_positive, default=None, help="size of the cyclic tagging")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("qbf", parents=[common], help="formula languages: gen or check")
    p.add_argument("action", choices=("gen", "check"))
    p.add_argument("files", nargs="+", help="QDIMACS files")
    p.set_defaults(func=cmd_qbf)

    p = sub.add_parser("certify", parents=[common], help="check a separator certificate")
    p.add_argument("certificate")
    p.add_argument("first")
    p.add_argument("second")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("selftest", parents=[common], help="run acceptance suites")
    p.add_argument("--suite", action="append", choices=sorted(SUITES), help="repeatable; default all")
    p.add_argument("--quick", action="store_true", help="smaller corpora")
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("bench", parents=[common], help="time the deciders, write CSV")
    p.add_argument("--max-states", type=_positive, default=3)
    p.add_argument("--count", type=_positive, default=5, help="pairs per size")
    p.add_argument("--levels", default="st-1/2,st-1,st-3/2,st-2")
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    logging.basicConfig(level=config.LOG_LEVEL)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code
    if args.cap_monoid:
        config.MONOID_CAP = args.cap_monoid
    if args.cap_det:
        config.DET_CAP = args.cap_det
    if args.wall_time is not None:
        config.WALL_TIME = float(args.wall_time)
    elif config.WALL_TIME:
        args.wall_time = config.WALL_TIME
    try:
        return args.func(args)
    except ResourceLimitError as e:
        print(Fore.RED + f"Resource limit: {e}")
        return EXIT_LIMIT
    except (SeparationError, FileNotFoundError, ValueError) as e:
        print(Fore.RED + f"Error: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
