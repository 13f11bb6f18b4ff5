import json
import os

import pandas as pd
import pytest

import config
from cli import EXIT_LIMIT, EXIT_NEGATIVE, EXIT_OK, EXIT_USAGE, main

STARTS_WITH_A = "re:a [a,b]*"
STARTS_WITH_B = "re:b [a,b]*"


@pytest.fixture(autouse=True)
def restore_caps(monkeypatch):
    for name in ("MONOID_CAP", "DET_CAP", "WALL_TIME"):
        monkeypatch.setattr(config, name, getattr(config, name))


@pytest.fixture
def out(tmp_path):
    return str(tmp_path / "result.json")


def read(path):
    with open(path, encoding="utf-8") as f:
        return json.load(f)


class TestSeparate:
    def test_inseparable_at_the_bottom(self, out, capsys):
        code = main(["separate", STARTS_WITH_A, STARTS_WITH_B, "--alphabet", "a,b", "--out", out])
        assert code == EXIT_NEGATIVE
        assert "NOT SEPARABLE" in capsys.readouterr().out
        data = read(out)
        assert data["verdict"]["separable"] is False
        assert data["manifest"]["level"] == "st-1/2"
        assert data["manifest"]["inputs"][0]["input"] == STARTS_WITH_A

    def test_separable_at_level_three_halves(self, out):
        code = main(["separate", STARTS_WITH_A, STARTS_WITH_B, "--alphabet", "a,b", "--level", "st-3/2",
                     "--out", out])
        assert code == EXIT_OK
        assert read(out)["verdict"]["separable"] is True

    def test_json_format_on_files(self, data_dir, out, capsys):
        first = os.path.join(data_dir, "instances", "a_then_any.json")
        second = os.path.join(data_dir, "instances", "b_then_any.json")
        code = main(["separate", first, second, "--level", "st-2", "--format", "json", "--out", out])
        assert code == EXIT_OK
        printed = json.loads(capsys.readouterr().out)
        assert printed == read(out)

    @pytest.mark.parametrize("argv", [
        ["separate", "re:a", "re:b"],
        ["separate", "re:a", "re:b", "--alphabet", "a,b", "--level", "st-7"],
        ["separate", "missing.json", "re:b", "--alphabet", "a,b"],
        ["separate", "re:a (", "re:b", "--alphabet", "a,b"],
    ])
    def test_usage_errors(self, argv, out):
        assert main(argv + ["--out", out]) == EXIT_USAGE

    @pytest.mark.parametrize("argv", [
        ["separate"],
        ["frobnicate"],
        ["separate", "re:a", "re:b", "--alphabet", "a,b", "--strategy", "x"],
        ["bench", "--count", "0"],
    ])
    def test_argument_errors_are_usage_errors(self, argv, capsys):
        assert main(argv) == EXIT_USAGE
        assert "usage:" in capsys.readouterr().err

    def test_fractional_wall_time(self, out):
        code = main(["separate", "re:a b", "re:a", "--alphabet", "a,b", "--wall-time", "30.5", "--out", out])
        assert code == EXIT_OK
        assert config.WALL_TIME == 30.5

    def test_monoid_cap(self, out):
        code = main(["separate", STARTS_WITH_A, STARTS_WITH_B, "--alphabet", "a,b", "--cap-monoid", "1",
                     "--out", out])
        assert code == EXIT_LIMIT
        assert config.MONOID_CAP == 1


def test_member(out):
    assert main(["member", "re:[a,b]* a [a,b]*", "--alphabet", "a,b", "--out", out]) == EXIT_OK
    assert read(out)["member"] is True
    assert main(["member", STARTS_WITH_A, "--alphabet", "a,b", "--out", out]) == EXIT_NEGATIVE


class TestMonoid:
    def test_syntactic_monoid(self, out):
        assert main(["monoid", "re:(a a)*", "--alphabet", "a", "--minimize", "--out", out]) == EXIT_OK
        data = read(out)
        assert data["stats"] == {"size": 2, "idempotents": 1, "j_depth": 1}
        assert data["morphism"]["accept"] == [0]

    def test_basis_export(self, out):
        assert main(["monoid", "--basis", "at", "--alphabet", "a,b", "--out", out]) == EXIT_OK
        stats = read(out)["stats"]
        assert stats["size"] == 4 and stats["j_depth"] == 3 and stats["idempotents"] == 4

    def test_needs_something_to_export(self, out):
        assert main(["monoid", "--out", out]) == EXIT_USAGE


class TestReduce:
    def test_cyclic_tagging(self, out):
        assert main(["reduce", "re:a b", "--alphabet", "a,b", "--out", out]) == EXIT_OK
        data = read(out)
        assert data["stats"]["monoid"] <= data["size_bound"]
        assert data["manifest"]["tagging_rank"] == len(data["transition_order"])
        assert data["language_nfa"]["alphabet"] == ["a", "b", "0", "1"]

    def test_tagging_too_small(self, out):
        assert main(["reduce", "re:a b", "--alphabet", "a,b", "--k", "1", "--out", out]) == EXIT_USAGE

    def test_morphism_input_is_rejected(self, data_dir, out):
        path = os.path.join(data_dir, "instances", "even_a.json")
        assert main(["reduce", path, "--out", out]) == EXIT_USAGE


class TestQbf:
    def test_gen(self, data_dir, out):
        path = os.path.join(data_dir, "qbf", "exists_forall.qdimacs")
        assert main(["qbf", "gen", path, "--out", out]) == EXIT_OK
        data = read(out)
        assert data["instance"]["index_mapping"] == {"x1": 2, "x2": 1}
        assert data["qdimacs"].startswith("p cnf 2 1")

    def test_check_out_of_budget_is_skipped(self, data_dir, out):
        path = os.path.join(data_dir, "qbf", "exists_x.qdimacs")
        assert main(["qbf", "check", path, "--wall-time", "0.000000001", "--out", out]) == EXIT_OK
        (result,) = read(out)["results"]
        assert result["status"] == "SKIPPED"
        assert "seconds" not in result

    def test_check_reports_broken_files(self, tmp_path, out):
        broken = tmp_path / "broken.qdimacs"
        broken.write_text("p cnf 1 1\n1\n", encoding="utf-8")
        assert main(["qbf", "check", str(broken), "--out", out]) == EXIT_USAGE
        assert read(out)["results"][0]["status"] == "ERROR"


class TestCertify:
    def paths(self, data_dir):
        cert = os.path.join(data_dir, "certificates", "starts_with_a.json")
        first = os.path.join(data_dir, "instances", "a_then_any.json")
        second = os.path.join(data_dir, "instances", "b_then_any.json")
        return cert, first, second

    def test_valid(self, data_dir, out):
        assert main(["certify", *self.paths(data_dir), "--out", out]) == EXIT_OK
        assert read(out)["valid"] is True

    def test_invalid(self, data_dir, out):
        cert, first, second = self.paths(data_dir)
        assert main(["certify", cert, second, first, "--out", out]) == EXIT_NEGATIVE


def test_selftest(out):
    assert main(["selftest", "--suite", "verdicts", "--quick", "--out", out]) == EXIT_OK
    (report,) = read(out)["reports"]
    assert report["suite"] == "verdicts" and report["failed"] == 0


def test_bench(tmp_path):
    csv = str(tmp_path / "bench.csv")
    assert main(["bench", "--max-states", "1", "--count", "2", "--levels", "st-1/2,st-1", "--out", csv]) == EXIT_OK
    df = pd.read_csv(csv)
    assert len(df) == 4
    assert set(df["level"]) == {"st-1/2", "st-1"}
    assert {"seconds", "separable", "status"} <= set(df.columns)
