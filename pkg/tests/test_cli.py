import json

import allure
import pytest
from typer.testing import CliRunner

from market_base.cli import ExitCode, app
from market_base.exceptions import InternalInvariantError
from market_base.instance_generator import GeneratorConfig, generate
from market_base.market_serializer import write_instance
from utilities.ironman import IronMan

FEATURE = "worked_examples"

runner = CliRunner()


def instance_file(tmp_path, name, lower=0, upper=10, seller_b="-3", buyer_b="7"):
    path = tmp_path / name
    path.write_text(
        json.dumps(
            {
                "sellers": ["1"],
                "buyers": ["1"],
                "pairs": [
                    {
                        "seller": "1",
                        "buyer": "1",
                        "lower": lower,
                        "upper": upper,
                        "seller_valuation": {"kind": "linear", "a": "1", "b": seller_b},
                        "buyer_valuation": {"kind": "linear", "a": "1", "b": buyer_b},
                    }
                ],
            }
        ),
        encoding="utf-8",
    )
    return path


def overflowing_instance_file(tmp_path):
    # exp(1000*x) leaves the range of a double well inside [0, 10]
    path = instance_file(tmp_path, "overflow.json")
    document = json.loads(path.read_text(encoding="utf-8"))
    document["pairs"][0]["seller_valuation"] = {"kind": "exponential", "a": "1", "b": "0", "c": "1000"}
    path.write_text(json.dumps(document), encoding="utf-8")
    return path


def invoke(*args):
    return runner.invoke(app, [str(arg) for arg in args])


@pytest.fixture
def single_pair_file():
    return IronMan.dataset_file(FEATURE, "single_pair_instance.json")


@allure.suite("CLI Suite")
@allure.feature("Command Line")
class TestCli:

    @allure.story("solve")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("Solving writes the stable outcome and, on request, the trace.")
    def test_solve_writes_golden_outcome(self, single_pair_file, tmp_path, assertions):
        out = tmp_path / "outcome.json"
        result = invoke("solve", single_pair_file, "--out", out)
        assert result.exit_code == ExitCode.OK, result.output
        assertions.assert_golden_bytes(
            out.read_bytes(), IronMan.load_bytes(FEATURE, "single_pair_outcome.json"), "single_pair_outcome.json"
        )

    def test_solve_prints_to_stdout_without_out(self, single_pair_file):
        result = invoke("solve", single_pair_file)
        assert result.exit_code == ExitCode.OK
        assert '"iterations": 1' in result.stdout

    def test_solve_then_audit(self, tmp_path):
        instance = IronMan.dataset_file(FEATURE, "competition_instance.json")
        trace, report = tmp_path / "trace.json", tmp_path / "audit.json"
        assert invoke("solve", instance, "--trace", trace, "-o", tmp_path / "o.json").exit_code == ExitCode.OK
        assert len(json.loads(trace.read_text(encoding="utf-8"))) == 18

        result = invoke("audit", instance, trace, "--out", report)
        assert result.exit_code == ExitCode.OK
        assert json.loads(report.read_text(encoding="utf-8")) == {"ok": True, "passes": 18, "bound": 24, "violations": []}

    def test_audit_flags_tampered_trace(self, tmp_path):
        instance = IronMan.dataset_file(FEATURE, "competition_instance.json")
        trace = tmp_path / "trace.json"
        invoke("solve", instance, "--trace", trace, "-o", tmp_path / "o.json")
        passes = json.loads(trace.read_text(encoding="utf-8"))
        passes[3]["r"]["1"] = "0"
        trace.write_text(json.dumps(passes), encoding="utf-8")

        report = tmp_path / "audit.json"
        result = invoke("audit", instance, trace, "--out", report)
        assert result.exit_code == ExitCode.UNSTABLE
        violation = json.loads(report.read_text(encoding="utf-8"))["violations"][0]
        assert (violation["check"], violation["pass"]) == ("buyer payoffs non-decreasing", 3)

    @pytest.mark.parametrize(
        "kwargs",
        [{"lower": 5, "upper": 3}, {"seller_b": "abc"}],
        ids=["reversed_bounds", "bad_rational"],
    )
    def test_solve_rejects_bad_input(self, tmp_path, kwargs):
        result = invoke("solve", instance_file(tmp_path, "bad.json", **kwargs))
        assert result.exit_code == ExitCode.INPUT_ERROR

    def test_solve_rejects_overflowing_valuation(self, tmp_path):
        result = invoke("solve", overflowing_instance_file(tmp_path))
        assert result.exit_code == ExitCode.INPUT_ERROR

    def test_solve_missing_file(self, tmp_path):
        assert invoke("solve", tmp_path / "nowhere.json").exit_code == ExitCode.INPUT_ERROR

    def test_solve_internal_failure(self, single_pair_file, monkeypatch):
        def broken_run(self):
            raise InternalInvariantError("forced", states=())

        monkeypatch.setattr("market_base.cli.PriceAdjustmentSolver.run", broken_run)
        assert invoke("solve", single_pair_file).exit_code == ExitCode.INTERNAL_FAILURE

    # -------------------------------------------------------------------------

    @allure.story("verify")
    @allure.severity(allure.severity_level.CRITICAL)
    @allure.description("Verification exits 0 on stable outcomes and 1 on blocked ones.")
    def test_verify_stable_outcome(self, single_pair_file, tmp_path):
        report = tmp_path / "report.json"
        outcome = IronMan.dataset_file(FEATURE, "single_pair_outcome.json")
        result = invoke("verify", single_pair_file, outcome, "--out", report)
        assert result.exit_code == ExitCode.OK
        assert json.loads(report.read_text(encoding="utf-8"))["stable"] is True

    def test_verify_blocked_outcome(self, single_pair_file, tmp_path):
        outcome, report = tmp_path / "empty.json", tmp_path / "report.json"
        outcome.write_text(json.dumps({"matching": [], "q": {"1": "0"}, "r": {"1": "0"}}), encoding="utf-8")
        result = invoke("verify", single_pair_file, outcome, "--out", report)
        assert result.exit_code == ExitCode.UNSTABLE
        witnesses = json.loads(report.read_text(encoding="utf-8"))["witnesses"]
        assert [w["c"] for w in witnesses] == [4, 5, 6]

    def test_verify_outcome_outside_the_market(self, single_pair_file, tmp_path):
        outcome = tmp_path / "foreign.json"
        outcome.write_text(
            json.dumps({"matching": [{"seller": "9", "buyer": "1", "price": 3}], "q": {}, "r": {}}),
            encoding="utf-8",
        )
        assert invoke("verify", single_pair_file, outcome).exit_code == ExitCode.INPUT_ERROR

    # -------------------------------------------------------------------------

    @allure.story("gen")
    @allure.severity(allure.severity_level.NORMAL)
    @allure.description("Generation from flags or a config file is deterministic.")
    def test_gen_from_flags(self, tmp_path):
        out = tmp_path / "inst.json"
        result = invoke("gen", "--seed", 3, "--sellers", 2, "--buyers", 3, "--lo", 1, "--hi", 8, "--out", out)
        assert result.exit_code == ExitCode.OK
        expected = generate(GeneratorConfig(seed=3, num_sellers=2, num_buyers=3, price_range=(1, 8)))
        assert out.read_bytes() == write_instance(expected)

    def test_gen_from_config_with_seed_override(self, tmp_path):
        config, out = tmp_path / "config.json", tmp_path / "inst.json"
        config.write_text(json.dumps({"seed": 1, "num_sellers": 3}), encoding="utf-8")
        assert invoke("gen", "--config", config, "--seed", 8, "-o", out).exit_code == ExitCode.OK
        assert out.read_bytes() == write_instance(generate(GeneratorConfig(seed=8, num_sellers=3)))

    @pytest.mark.parametrize(
        "args",
        [("--lo", 5, "--hi", 3), ("--sellers", 0), ("--linear", 0, "--piecewise", 0, "--exponential", 0)],
        ids=["empty_range", "no_sellers", "no_families"],
    )
    def test_gen_rejects_bad_flags(self, args):
        assert invoke("gen", *args).exit_code == ExitCode.INPUT_ERROR

    # -------------------------------------------------------------------------

    @allure.story("oracle")
    @allure.severity(allure.severity_level.NORMAL)
    @allure.description("Enumeration of stable outcomes with its size guard.")
    def test_oracle_lists_stable_outcomes(self, single_pair_file, tmp_path):
        out = tmp_path / "oracle.json"
        assert invoke("oracle", single_pair_file, "--out", out).exit_code == ExitCode.OK
        outcomes = json.loads(out.read_text(encoding="utf-8"))["outcomes"]
        assert sorted(o["matching"][0]["price"] for o in outcomes) == [3, 4, 5, 6, 7]

    def test_oracle_guard(self, tmp_path):
        wide = instance_file(tmp_path, "wide.json", upper=50)
        assert invoke("oracle", wide).exit_code == ExitCode.GUARD_REFUSED

    def test_oracle_rejects_invalid_instance(self, tmp_path):
        reversed_bounds = instance_file(tmp_path, "reversed.json", lower=5, upper=3)
        assert invoke("oracle", reversed_bounds).exit_code == ExitCode.INPUT_ERROR

    # -------------------------------------------------------------------------

    @allure.story("check")
    @allure.severity(allure.severity_level.MINOR)
    @allure.description("Instance validation from the command line.")
    def test_check_valid_instance(self, single_pair_file, tmp_path):
        out = tmp_path / "check.json"
        assert invoke("check", single_pair_file, "--out", out).exit_code == ExitCode.OK
        assert json.loads(out.read_text(encoding="utf-8")) == {"ok": True, "violations": [], "warnings": []}

    def test_check_reports_violations(self, tmp_path):
        out = tmp_path / "check.json"
        result = invoke("check", instance_file(tmp_path, "reversed.json", lower=5, upper=3), "--out", out)
        assert result.exit_code == ExitCode.UNSTABLE
        violations = json.loads(out.read_text(encoding="utf-8"))["violations"]
        assert any(v.startswith("bounds reversed at (1,1)") for v in violations)

    def test_check_reports_overflowing_valuation(self, tmp_path):
        out = tmp_path / "check.json"
        result = invoke("check", overflowing_instance_file(tmp_path), "--out", out)
        assert result.exit_code == ExitCode.UNSTABLE
        violations = json.loads(out.read_text(encoding="utf-8"))["violations"]
        assert any(v.startswith("seller valuation at (1,1) overflows a double") for v in violations)

    def test_check_unparseable_instance(self, tmp_path):
        garbage = tmp_path / "garbage.json"
        garbage.write_text("{", encoding="utf-8")
        assert invoke("check", garbage).exit_code == ExitCode.INPUT_ERROR
