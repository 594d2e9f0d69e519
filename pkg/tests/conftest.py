"""pytest-bdd conftest.py - Auto-discover and register step definitions for pytest-bdd."""

import ast
import importlib
import inspect
import re
import sys
from pathlib import Path

import pytest
from pytest_bdd import given, parsers, then, when

from dualconv.algebra import LinearFunctional
from dualconv.dualsg import DualSemigroup, get_dual_semigroup
from tests.scenario_context import ScenarioContext

STEP_DEFS_DIR = Path(__file__).parent / "step_defs"


def _extract_step_decorators_from_source(module_path: Path) -> list[dict]:
    """Extract step decorator information from Python source code using AST.

    Returns a list of dictionaries with step information:
    - type: 'given', 'when', or 'then'
    - name: the step name string
    - function_name: the name of the function being decorated
    - uses_parser: True if the step has {placeholders} or uses parsers.parse()
    """
    steps = []
    tree = ast.parse(module_path.read_text(encoding="utf-8"), filename=str(module_path))
    for node in ast.walk(tree):
        if not isinstance(node, ast.FunctionDef):
            continue
        for decorator in node.decorator_list:
            if not (
                isinstance(decorator, ast.Call)
                and isinstance(decorator.func, ast.Name)
                and decorator.func.id in ("given", "when", "then")
                and decorator.args
            ):
                continue
            argument = decorator.args[0]
            if isinstance(argument, ast.Constant):
                step_name = argument.value
                uses_parser = bool(re.search(r"\{[a-zA-Z_][a-zA-Z0-9_]*(:[^}]*)?\}", step_name))
            elif (
                isinstance(argument, ast.Call)
                and isinstance(argument.func, ast.Attribute)
                and argument.func.attr == "parse"
                and argument.args
                and isinstance(argument.args[0], ast.Constant)
            ):
                step_name = argument.args[0].value
                uses_parser = True
            else:
                continue
            steps.append(
                {
                    "type": decorator.func.id,
                    "name": step_name,
                    "function_name": node.name,
                    "uses_parser": uses_parser,
                }
            )
    return steps


def _discover_and_register_step_definitions() -> None:
    """Re-register every step of tests/step_defs/ in this conftest's namespace.

    pytest-bdd only sees steps defined in conftest modules or the test module
    itself; wrapping them here lets the step modules stay small and topical.
    """
    step_files = sorted(
        f for f in STEP_DEFS_DIR.glob("*.py") if f.stem not in ("__init__", "helpers")
    )
    decorators = {"given": given, "when": when, "then": then}
    conftest_module = sys.modules[__name__]
    registered = 0

    for step_file in step_files:
        module = importlib.import_module(f"tests.step_defs.{step_file.stem}")
        for step_info in _extract_step_decorators_from_source(step_file):
            func_name = step_info["function_name"]
            original_func = getattr(module, func_name, None)
            assert callable(original_func), (
                f"Step function {func_name!r} not found in {step_file.stem}"
            )
            params_str = ", ".join(inspect.signature(original_func).parameters)
            wrapper_name = f"_{step_file.stem}_{func_name}_wrapper"
            escaped_step_name = step_info["name"].replace('"', '\\"')
            matcher = (
                f'parsers.parse("{escaped_step_name}")'
                if step_info["uses_parser"]
                else f'"{escaped_step_name}"'
            )
            step_code = f'''
@decorators["{step_info["type"]}"]({matcher})
def {wrapper_name}({params_str}):
    """Re-registered step definition wrapper."""
    return module.{func_name}({params_str})
'''
            exec_globals = {
                "decorators": decorators,
                "module": module,
                "parsers": parsers,
                "__name__": __name__,
            }
            exec(step_code, exec_globals, conftest_module.__dict__)  # noqa: S102
            wrapper = getattr(conftest_module, wrapper_name)
            wrapper.__module__ = __name__
            wrapper.__qualname__ = f"{__name__}.{wrapper_name}"
            registered += 1

    print(f"conftest.py: registered {registered} step definitions")


# Must run before pytest-bdd scans for step definitions
_discover_and_register_step_definitions()


@pytest.fixture
def scenario_context() -> ScenarioContext:
    """Fresh per-scenario state shared between steps."""
    return ScenarioContext()


@pytest.fixture
def primitive() -> DualSemigroup:
    """T(ℂx) with primitive comultiplication."""
    return get_dual_semigroup("primitive:1")


@pytest.fixture
def gaussian(primitive: DualSemigroup) -> LinearFunctional:
    """ψ(xⁿ) = δ_{n,2}: the Gaussian, semicircle and Bernoulli generator."""
    return LinearFunctional.from_table(
        primitive.algebra, {("x", "x"): 1.0}, hermitian=True, label="gaussian"
    )
