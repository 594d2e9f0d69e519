"""Command line step definitions for BDD tests.

Job files are taken from dualconv_config/jobs; reports are read back from
the JSON printed on stdout.
"""

import json
from pathlib import Path

import pytest
from dualconv.cli import main
from dualconv_config import JOBS_DIR
from pytest_bdd import then, when

from tests.scenario_context import ScenarioContext


def _run(
    command: str, config: Path, capsys: pytest.CaptureFixture[str]
) -> tuple[int, str]:
    capsys.readouterr()
    code = main([command, "--config", str(config)])
    return code, capsys.readouterr().out


@when('the "{command}" command runs the job file "{job}"')
def run_job_file(
    command: str,
    job: str,
    scenario_context: ScenarioContext,
    capsys: pytest.CaptureFixture[str],
) -> None:
    scenario_context.exit_code, scenario_context.stdout = _run(
        command, JOBS_DIR / job, capsys
    )
    print(f"✓ dualconv {command} {job} exited with {scenario_context.exit_code}")


@when('the "{command}" command runs a job with the product "{product}"')
def run_with_product(
    command: str,
    product: str,
    scenario_context: ScenarioContext,
    capsys: pytest.CaptureFixture[str],
    tmp_path: Path,
) -> None:
    job = tmp_path / "job.json"
    job.write_text(
        json.dumps({"product": product, "generator": {"table": {"x x": 1}}}),
        encoding="utf-8",
    )
    scenario_context.exit_code, scenario_context.stdout = _run(command, job, capsys)


@when('the "{command}" command runs the job file "{job}" twice')
def run_job_twice(
    command: str,
    job: str,
    scenario_context: ScenarioContext,
    capsys: pytest.CaptureFixture[str],
) -> None:
    first = _run(command, JOBS_DIR / job, capsys)
    second = _run(command, JOBS_DIR / job, capsys)
    scenario_context.report = (json.loads(first[1]), json.loads(second[1]))


@then("the exit code is {code:d}")
def exit_code_is(code: int, scenario_context: ScenarioContext) -> None:
    assert scenario_context.exit_code == code, (
        f"Exit code {scenario_context.exit_code}, expected {code}"
    )


@then("the report is marked as {outcome}")
def report_outcome(outcome: str, scenario_context: ScenarioContext) -> None:
    report = json.loads(scenario_context.stdout)
    assert report["passed"] is (outcome == "passed"), (
        f"Report passed={report['passed']}, expected {outcome}"
    )


@then("both reports agree apart from the wall clock")
def reports_agree(scenario_context: ScenarioContext) -> None:
    first, second = scenario_context.report
    first.pop("wall_clock")
    second.pop("wall_clock")
    assert first == second
