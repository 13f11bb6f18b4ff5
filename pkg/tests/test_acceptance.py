import pytest

import acceptance
from acceptance import SUITES, _enforce_skip_rate, run_suites, subword_upward_closure, summary_frame
from automata import accepts, words
from errors import ResourceLimitError

CHEAP = ["verdicts", "dual", "red", "certificates"]


def test_upward_closure(regex, ab):
    closed = subword_upward_closure(regex("a b"))
    for w in words(ab, 4):
        assert accepts(closed, w) == ("a" in w and "b" in w[w.index("a"):])


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suites(["nope"])


@pytest.mark.parametrize("name", CHEAP)
def test_quick_suites_pass(name, seed):
    (report,) = run_suites([name], seed, quick=True)
    assert report["suite"] == name
    assert report["failed"] == 0, report["failures"]
    assert report["passed"] > 0


def test_summary_frame(seed):
    reports = run_suites(["verdicts", "red"], seed, quick=True)
    df = summary_frame(reports)
    assert list(df.columns) == ["suite", "passed", "failed", "skipped"]
    assert list(df["suite"]) == ["verdicts", "red"]
    assert df["failed"].sum() == 0


def _out_of_budget(*args, **kwargs):
    raise ResourceLimitError("test budget", 1)


@pytest.mark.parametrize("name", ["reduction", "bpolred"])
def test_mostly_skipped_suite_fails(name, seed, monkeypatch):
    monkeypatch.setattr(acceptance, "st_separates", _out_of_budget)
    (report,) = run_suites([name], seed, quick=True)
    assert report["passed"] == 0 and report["skipped"] > 0
    assert report["failed"] == 1
    assert report["failures"][-1]["case"] == "skip rate"


def test_few_skips_are_tolerated():
    report = {"suite": "x", "passed": 3, "failed": 0, "skipped": 2, "failures": []}
    assert _enforce_skip_rate(report)["failed"] == 0
    report["skipped"] = 3
    assert _enforce_skip_rate(report)["failed"] == 1


@pytest.mark.slow
@pytest.mark.parametrize("name", sorted(SUITES))
def test_full_suites(name, seed):
    (report,) = run_suites([name], seed)
    assert report["failed"] == 0, report["failures"]
