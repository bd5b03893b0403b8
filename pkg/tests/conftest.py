import json
import re

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from corpusclean import train, save_model
from corpusclean._scoring import warmup
from corpusclean.simtext import languages, seed_samples

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")

# one pass/fail line per acceptance criterion, printed at the end of the run
_acceptance = {}


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if m:
        n = int(m.group(1))
        _acceptance[n] = _acceptance.get(n, True) and report.passed


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_acceptance):
        terminalreporter.write_line(
            "ACCEPTANCE %d: %s" % (n, "PASS" if _acceptance[n] else "FAIL")
        )


@pytest.fixture(scope="session")
def compiled():
    warmup()


@pytest.fixture(scope="session")
def model3():
    """en/et/fi model trained on ~100 KB of seed text per language."""
    rng = np.random.default_rng(20260822)
    samples = {code: seed_samples(rng, code, 100_000) for code in languages()}
    return train(samples)


@pytest.fixture(scope="session")
def model3_path(model3, tmp_path_factory):
    path = tmp_path_factory.mktemp("model") / "model.json"
    save_model(model3, path)
    return str(path)


@pytest.fixture(scope="session")
def model3_json(model3_path):
    with open(model3_path, "r", encoding="utf-8") as f:
        return json.load(f)
