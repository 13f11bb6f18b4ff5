"""
acceptance.py
-------------
Self-test suites run by `cli.py selftest`. Each suite returns a report

    {"suite", "passed", "failed", "skipped", "failures": [...]}

and never raises on a wrong answer: failures are collected so that a run
shows every broken case at once. Budget and cap overruns count as skipped;
the reduction and bpolred suites fail when half of their cases or more are
skipped.
"""
import logging
import random
from typing import Any, Callable, Dict, Iterable, List, Optional

import pandas as pd

from algebra import compatible_product, image, is_good, transition_monoid
from automata import (
    Nfa,
    complement,
    equivalent,
    intersect,
    is_empty,
    minimize,
    morphism_to_nfa,
    parse_regex,
)
import config
from corpus import (
    AB,
    UNARY,
    exhaustive_contexts,
    full_product_context,
    one_variable_qbfs,
    random_contexts,
    random_nfa,
    random_nfa_pairs,
    random_pol_at_certificate,
    random_qbf,
    random_tagging,
)
from errors import ResourceLimitError, deadline_after
from hardness import build_bpolred_instance, check_qbf_reduction
from reduction import _LMonoidCarrier, build_L_monoid, build_L_nfa
from separation import (
    Level,
    _pair_morphism,
    bpol_separates,
    certificate_to_nfa,
    red,
    st_separates,
    verify_certificate,
)
from trees import saturate, saturate_naive

logger = logging.getLogger(__name__)

ST_LEVELS = ("st-1/2", "st-1", "st-3/2", "st-2")


def _report(name: str) -> Dict[str, Any]:
    return {"suite": name, "passed": 0, "failed": 0, "skipped": 0, "failures": []}


def _fail(report: Dict[str, Any], case: str, detail: str):
    report["failed"] += 1
    report["failures"].append({"case": case, "detail": detail})
    logger.error(f"[{report['suite']}] {case}: {detail}")


def _skip(report: Dict[str, Any], case: str, reason: Exception):
    report["skipped"] += 1
    logger.warning(f"[{report['suite']}] skipped {case}: {reason}")


def _enforce_skip_rate(report: Dict[str, Any]) -> Dict[str, Any]:
    """A suite that skips half of its cases or more has failed."""
    total = report["passed"] + report["failed"] + report["skipped"]
    if total and report["skipped"] * 2 >= total:
        _fail(report, "skip rate", f"{report['skipped']} of {total} cases skipped")
    return report


def _nfa_label(n: Nfa) -> str:
    return f"{n.state_count}q/{n.transition_count}t"


def subword_upward_closure(n: Nfa) -> Nfa:
    """Every word having a scattered subword in L(n): a self-loop on every letter at every state."""
    loops = frozenset((q, a, q) for q in range(n.state_count) for a in n.alphabet)
    return Nfa(n.alphabet, n.state_count, n.transitions | loops, n.initial, n.final)


# -------------------------------
# Saturation
# -------------------------------
def _contexts(seed: int, quick: bool):
    exhaustive = list(exhaustive_contexts())
    if quick:
        exhaustive = random.Random(seed).sample(exhaustive, min(150, len(exhaustive)))
    return exhaustive + random_contexts(seed, 20 if quick else 200)


def suite_oracle(seed: int, quick: bool = False) -> Dict[str, Any]:
    """Antichain saturation against the explicit least fixpoint."""
    report = _report("oracle")
    for i, ctx in enumerate(_contexts(seed, quick)):
        try:
            fast = saturate(ctx).downward_closure()
            naive = saturate_naive(ctx)
        except ResourceLimitError as e:
            _skip(report, f"context {i}", e)
            continue
        if fast != naive:
            _fail(report, f"context {i}", f"{len(fast ^ naive)} labels differ "
                                          f"(|M|={ctx.M.size}, |N|={ctx.N.size}, S={sorted(ctx.S)})")
        else:
            report["passed"] += 1
    return report


def suite_height(seed: int, quick: bool = False) -> Dict[str, Any]:
    """Raising the S-operation height past the basis J-depth adds no labels."""
    report = _report("height")
    for i, ctx in enumerate(_contexts(seed + 1, quick)):
        bound = ctx.alpha.basis.height(ctx.alpha.alphabet)
        base, higher = saturate(ctx), saturate(ctx, max_height=bound + 3)
        if not base.same_as(higher):
            _fail(report, f"context {i}", f"height {bound} and {bound + 3} disagree")
        else:
            report["passed"] += 1
    return report


# -------------------------------
# Verdicts
# -------------------------------
A_STAR = "[a,b]*"
KNOWN_VERDICTS = [
    # (L1, L2, {level: separable})
    (f"a {A_STAR}", f"b {A_STAR}", {"st-1/2": False, "st-1": False, "st-3/2": True, "st-2": True}),
    ("a b", "a", {"st-1/2": True, "st-1": True, "st-3/2": True, "st-2": True}),
    ("a", "a b", {"st-1/2": False, "st-1": True, "st-3/2": True, "st-2": True}),
    ("(a a)*", "a (a a)*", {level: False for level in ST_LEVELS}),
    (f"a {A_STAR}", f"a {A_STAR}", {level: False for level in ST_LEVELS}),
    ("b* a b*", "b*", {"st-1/2": True, "st-1": True, "st-3/2": True, "st-2": True}),
]


def suite_verdicts(seed: int, quick: bool = False) -> Dict[str, Any]:
    report = _report("verdicts")
    for left, right, expected in KNOWN_VERDICTS:
        n1, n2 = parse_regex(left, AB), parse_regex(right, AB)
        for level, separable in expected.items():
            verdict = st_separates(Level.parse(level), n1, n2)
            if verdict.separable != separable:
                _fail(report, f"{left} | {right} @ {level}", f"expected separable={separable}")
            else:
                report["passed"] += 1
    # Pol(TRIV) separability is disjointness from the subword upward closure
    for i, (n1, n2) in enumerate(random_nfa_pairs(seed, 10 if quick else 50)):
        expected = is_empty(intersect(subword_upward_closure(n1), n2))
        verdict = st_separates(Level.parse("st-1/2"), n1, n2)
        if verdict.separable != expected:
            _fail(report, f"random pair {i}", f"st-1/2 gave {verdict.separable}, upward closure says {expected}")
        else:
            report["passed"] += 1
    return report


def suite_monotonicity(seed: int, quick: bool = False) -> Dict[str, Any]:
    """Separable at one level implies separable at every higher level; more S gives more labels."""
    report = _report("monotonicity")
    for i, (n1, n2) in enumerate(random_nfa_pairs(seed, 15 if quick else 100)):
        verdicts = []
        try:
            for level in ST_LEVELS:
                verdicts.append(st_separates(Level.parse(level), n1, n2).separable)
        except ResourceLimitError as e:
            _skip(report, f"pair {i}", e)
            continue
        broken = [ST_LEVELS[k] for k in range(3) if verdicts[k] and not verdicts[k + 1]]
        if broken:
            _fail(report, f"pair {i} ({_nfa_label(n1)}, {_nfa_label(n2)})",
                  f"separable at {broken[0]} but not above: {verdicts}")
        else:
            report["passed"] += 1

    contexts = full_product_context()
    for i, small in enumerate(contexts):
        for large in contexts:
            if large.beta is not small.beta or not small.S < large.S:
                continue
            if not saturate(small).is_below(saturate(large)):
                _fail(report, f"S-context {i}", f"labels for S={sorted(small.S)} not below S={sorted(large.S)}")
            else:
                report["passed"] += 1
    return report


# -------------------------------
# Reductions
# -------------------------------
def suite_reduction(seed: int, quick: bool = False, budget: float = 30.0) -> Dict[str, Any]:
    """Transition-monoid and tagging strategies agree."""
    report = _report("reduction")
    for i, (n1, n2) in enumerate(random_nfa_pairs(seed, 10 if quick else 100, max_transitions=4)):
        for level in ("st-1/2", "st-1", "st-3/2"):
            case = f"pair {i} @ {level}"
            try:
                lv = Level.parse(level)
                tm = st_separates(lv, n1, n2, "tm", deadline=deadline_after(budget))
                tag = st_separates(lv, n1, n2, "tag", deadline=deadline_after(budget))
            except ResourceLimitError as e:
                _skip(report, case, e)
                continue
            if tm.separable != tag.separable:
                _fail(report, case, f"tm={tm.separable} tag={tag.separable}")
            else:
                report["passed"] += 1
    return _enforce_skip_rate(report)


def suite_dual(seed: int, quick: bool = False) -> Dict[str, Any]:
    """The automaton and the monoid for a tagged language recognize the same words."""
    report = _report("dual")
    rng = random.Random(seed)
    for i in range(15 if quick else 100):
        n = random_nfa(rng, AB, 3, max_transitions=4)
        p = random_tagging(rng, n.transition_count)
        case = f"case {i} ({_nfa_label(n)}, |T|={p.size})"
        try:
            monoid = build_L_monoid(n, p)
        except ResourceLimitError as e:
            _skip(report, case, e)
            continue
        bound = _LMonoidCarrier(n, p).size_bound()
        if monoid.morphism.target.size > bound:
            _fail(report, case, f"monoid of size {monoid.morphism.target.size} above {bound}")
        elif not equivalent(build_L_nfa(n, p), morphism_to_nfa(monoid)):
            _fail(report, case, "automaton and monoid disagree")
        else:
            report["passed"] += 1
    return report


def suite_qbf(seed: int, quick: bool = False, budget: float = 120.0) -> Dict[str, Any]:
    """Truth of the formula is inseparability of its languages at level 3/2."""
    report = _report("qbf")
    formulas = one_variable_qbfs()
    if quick:
        formulas = formulas[:2] + formulas[6:8]
    for q in formulas:
        outcome = check_qbf_reduction(q)
        _count_qbf(report, outcome)
    # two variables: best effort only
    rng = random.Random(seed)
    for _ in range(0 if quick else 4):
        q = random_qbf(rng, max_vars=2)
        _count_qbf(report, check_qbf_reduction(q, budget=budget))
    return report


def _count_qbf(report: Dict[str, Any], outcome: Dict[str, Any]):
    if outcome["status"] == "PASS":
        report["passed"] += 1
    elif outcome["status"] == "SKIPPED":
        report["skipped"] += 1
    else:
        _fail(report, outcome["formula"], f"truth={outcome['truth']} separable={outcome['separable']}")


def _syntactic(n: Nfa, deadline: Optional[float]):
    return transition_monoid(minimize(n, deadline=deadline), deadline=deadline)


def suite_bpolred(seed: int, quick: bool = False, budget: float = 60.0) -> Dict[str, Any]:
    """
    Level 3/2 on (H, H') against level 2 on the transformed pair. H and H'
    are unary; every language goes through its syntactic monoid.
    """
    report = _report("bpolred")
    for i, (h, hp) in enumerate(random_nfa_pairs(seed, 4 if quick else 20, max_states=2, alphabet=UNARY)):
        case = f"pair {i} ({_nfa_label(h)}, {_nfa_label(hp)})"
        try:
            deadline = deadline_after(budget)
            before = st_separates(Level.parse("st-3/2"), _syntactic(h, deadline), _syntactic(hp, deadline),
                                  deadline=deadline)
            L, Lp = build_bpolred_instance(h, hp)
            deadline = deadline_after(budget)
            after = st_separates(Level.parse("st-2"), _syntactic(L, deadline), _syntactic(Lp, deadline),
                                 deadline=deadline)
        except ResourceLimitError as e:
            _skip(report, case, e)
            continue
        if before.separable != after.separable:
            _fail(report, case, f"st-3/2 on (H, H') gave {before.separable}, st-2 on the transform {after.separable}")
        else:
            report["passed"] += 1
    return _enforce_skip_rate(report)


def suite_red(seed: int, quick: bool = False) -> Dict[str, Any]:
    """The Red chain strictly shrinks through good sets down to a fixpoint."""
    report = _report("red")
    for i, (n1, n2) in enumerate(random_nfa_pairs(seed, 8 if quick else 40)):
        for level in ("st-1", "st-2"):
            case = f"pair {i} @ {level}"
            try:
                lv = Level.parse(level)
                cm, F0, F1 = compatible_product(transition_monoid(n1), transition_monoid(n2), lv.basis)
                problems = _red_problems(cm)
                verdict = bpol_separates(cm, F0, F1)
            except ResourceLimitError as e:
                _skip(report, case, e)
                continue
            except AssertionError as e:
                _fail(report, case, str(e))
                continue
            if problems:
                _fail(report, case, "; ".join(problems))
            elif verdict.stats["red_chain"] != sorted(set(verdict.stats["red_chain"]), reverse=True):
                _fail(report, case, f"chain {verdict.stats['red_chain']} is not strictly decreasing")
            else:
                report["passed"] += 1
    return report


def _red_problems(cm) -> List[str]:
    members = sorted(image(cm.morphism))
    beta = _pair_morphism(cm, members)
    S = frozenset(range(len(members) ** 2))
    problems = []
    while True:
        nxt = red(cm, beta, members, S)
        if not nxt <= S:
            problems.append("Red left its argument")
            break
        if nxt == S:
            break
        if not is_good(nxt, beta.morphism):
            problems.append(f"Red produced a set of {len(nxt)} pairs that is not good")
            break
        S = nxt
    return problems


def suite_certificates(seed: int, quick: bool = False) -> Dict[str, Any]:
    """Generated Pol(AT) languages separate themselves from their complement."""
    report = _report("certificates")
    rng = random.Random(seed)
    level = Level.parse("st-3/2")
    for i in range(5 if quick else 20):
        c = random_pol_at_certificate(rng)
        case = f"certificate {i}"
        try:
            K = certificate_to_nfa(c)
            co = complement(K)
            valid = verify_certificate(c, K, co)
            separable = st_separates(level, K, co).separable
        except ResourceLimitError as e:
            _skip(report, case, e)
            continue
        if not (valid and separable):
            _fail(report, case, f"verified={valid} separable={separable}")
        else:
            report["passed"] += 1
    return report


SUITES: Dict[str, Callable[..., Dict[str, Any]]] = {
    "oracle": suite_oracle,
    "height": suite_height,
    "verdicts": suite_verdicts,
    "monotonicity": suite_monotonicity,
    "reduction": suite_reduction,
    "dual": suite_dual,
    "qbf": suite_qbf,
    "bpolred": suite_bpolred,
    "red": suite_red,
    "certificates": suite_certificates,
}


def run_suites(names: Optional[Iterable[str]] = None, seed: Optional[int] = None,
               quick: bool = False) -> List[Dict[str, Any]]:
    seed = config.DEFAULT_SEED if seed is None else seed
    names = list(names) if names else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; choose from {sorted(SUITES)}")
    reports = []
    for name in names:
        logger.info(f"Running suite {name} (seed {seed}{', quick' if quick else ''})")
        reports.append(SUITES[name](seed, quick))
    return reports


def summary_frame(reports: List[Dict[str, Any]]) -> pd.DataFrame:
    rows = [{k: r[k] for k in ("suite", "passed", "failed", "skipped")} for r in reports]
    return pd.DataFrame(rows, columns=["suite", "passed", "failed", "skipped"])
