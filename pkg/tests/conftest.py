"""Shared fixtures and the acceptance-summary terminal hook."""

import numpy as np
import pytest

from patchbound import build_uniform
from patchbound.experiments import (
    figure_test_problems,
    rotating_convection_problem,
    rotating_convection_reference,
    smooth_anisotropic_problem,
    smooth_anisotropic_reference,
)

# one (criterion, passed, detail) entry per acceptance test; printed at the end
ACCEPTANCE_LINES = []


def record_acceptance(name, passed, detail=""):
    ACCEPTANCE_LINES.append((name, bool(passed), detail))
    assert passed, f"{name}: {detail}"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in ACCEPTANCE_LINES:
        tag = "PASS" if passed else "FAIL"
        suffix = f" -- {detail}" if detail else ""
        terminalreporter.write_line(f"[{tag}] {name}{suffix}")


@pytest.fixture(scope="session")
def mesh10():
    return build_uniform(10, 10)


@pytest.fixture(scope="session")
def anisotropic_problem():
    return smooth_anisotropic_problem()


@pytest.fixture(scope="session")
def convection_problem():
    return rotating_convection_problem()


def symmetric_problem_catalog():
    """(name, problem, reference) triples covering all bundled symmetric
    test problems with their references."""
    entries = [
        ("ex1-ap1", smooth_anisotropic_problem(), smooth_anisotropic_reference("ap1")),
        ("ex1-ap2", smooth_anisotropic_problem(), smooth_anisotropic_reference("ap2")),
    ]
    entries.extend(figure_test_problems())
    return entries


def nonsym_reference(which):
    return rotating_convection_reference(which)


def relerr(value, target):
    return abs(value - target) / abs(target)


def assert_close(value, target, rel, label=""):
    err = relerr(value, target)
    assert err <= rel, f"{label}: {value:.6g} vs {target:.6g} (rel err {err:.3g})"


def sorted_containment(bounds, eigs, slack=1e-9):
    """Per-sorted-index containment of eigenvalues between bound vectors."""
    lam = np.sort(np.asarray(eigs).real)
    return bool(
        np.all(bounds.gamma_min - slack <= lam) and np.all(lam <= bounds.gamma_max + slack)
    )
