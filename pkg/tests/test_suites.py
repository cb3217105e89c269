import pytest

from overlaps import suites


@pytest.mark.parametrize("name", ["tau-zero", "dual-path", "regimes"])
def test_cross_check_suites(name):
    (result,) = suites.run_suite(name)
    print(result.line())
    assert result.passed, [c for c in result.checks if not c.passed]


def test_line_format():
    r = suites.CriterionResult("x", "demo", [suites.Check("a", True, 1.0, 1.0, 0.0, 1e-3)])
    assert r.line().startswith("[PASS] criterion x: demo (1 checks, 0 failed")
    r.checks.append(suites.Check("b", False, 2.0, 1.0, 1.0, 1e-3))
    assert r.line().startswith("[FAIL]")
    assert not suites.CriterionResult("y", "empty").passed
