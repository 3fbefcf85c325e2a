"""Shared fixtures and the session-wide SVM audit.

Every SVM fit made in-process during the test session is recorded: the
worst KKT violation and whether the solver converged. Fits made inside
worker processes are recorded through the solver summary that the
evaluation report carries back. ``test_acceptance.py::test_c06_svm``
reads the registry, so it is moved to the very end of the run.
"""
import numpy as np
import pytest

import radiomarker.evaluation as evaluation
import radiomarker.svm as svm


class SvmAudit:
    def __init__(self):
        self.n_models = 0
        self.n_degraded = 0
        self.worst = 0.0

    def add(self, n, worst, degraded):
        self.n_models += int(n)
        self.worst = max(self.worst, float(worst))
        self.n_degraded += int(degraded)


AUDIT = SvmAudit()


def _wrap_package(fn):
    def wrapped(*args, **kwargs):
        model = fn(*args, **kwargs)
        AUDIT.add(1, model.kkt_violation, not model.converged)
        return model
    return wrapped


def _wrap_grid(fn):
    def wrapped(*args, **kwargs):
        out, worst, degraded = fn(*args, **kwargs)
        AUDIT.add(out.size, worst, degraded)
        return out, worst, degraded
    return wrapped


def _wrap_report(cls):
    class RecordedReport(cls):
        def __init__(self, *args, **kwargs):
            super().__init__(*args, **kwargs)
            # fits made in worker processes only reach us through the report
            AUDIT.add(0, self.max_kkt_violation, self.n_degraded)

    RecordedReport.__name__ = cls.__name__
    RecordedReport.__qualname__ = cls.__qualname__
    return RecordedReport


svm._package = _wrap_package(svm._package)
svm.grid_decisions = _wrap_grid(svm.grid_decisions)
evaluation.grid_decisions = svm.grid_decisions
evaluation.EvalReport = _wrap_report(evaluation.EvalReport)


@pytest.fixture(scope="session")
def svm_audit():
    return AUDIT


def pytest_collection_modifyitems(session, config, items):
    last = [it for it in items if it.name == "test_c06_svm"]
    rest = [it for it in items if it.name != "test_c06_svm"]
    items[:] = rest + last


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import ACCEPTANCE_KEY
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
