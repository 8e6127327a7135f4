from __future__ import annotations

from pathlib import Path

import numpy as np
import pytest

import helpers

DOCS_DIR = Path(__file__).resolve().parent.parent / "docs"


@pytest.fixture
def rng():
    return np.random.default_rng(20250808)


@pytest.fixture(scope="session")
def corpus_lines():
    return DOCS_DIR.joinpath("prompt_corpus.txt").read_text().splitlines()


@pytest.fixture(scope="session")
def malformed_lines():
    return DOCS_DIR.joinpath("prompt_malformed.txt").read_text().splitlines()


@pytest.fixture(scope="session")
def separable_dataset():
    """(train RankingDataset, held-out pairs, image store); see helpers."""
    return helpers.build_separable_dataset()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion at the end of the run."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and report.when == "call":
                name = report.nodeid.split("::")[-1]
                lines.append((name, outcome == "passed"))
    if lines:
        terminalreporter.write_line("")
        terminalreporter.write_line("acceptance criteria:")
        for name, ok in sorted(lines):
            terminalreporter.write_line(
                f"  {'PASS' if ok else 'FAIL'}  {name}"
            )
