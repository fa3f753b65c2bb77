import json
from pathlib import Path

import pytest

from madp import evaluation
from madp.backends import ScriptedBackend
from madp.classify import train_signatures
from madp.fixtures import build_corpus, build_invoice_doc
from madp.model import CategoryLabel, DocType
from madp.runtime import Runtime


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "criterion(name): acceptance criterion, reported pass/fail "
        "in the terminal summary")
    config._criterion_results = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker and report.when == "call":
        item.config._criterion_results.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = getattr(config, "_criterion_results", [])
    if results:
        terminalreporter.write_line("")
        for name, passed in results:
            terminalreporter.write_line(
                f"[ACCEPTANCE] {'PASS' if passed else 'FAIL'} {name}")


@pytest.fixture(scope="session")
def corpus_root(tmp_path_factory) -> Path:
    root = tmp_path_factory.mktemp("corpus")
    build_corpus(root)
    return root


@pytest.fixture(scope="session")
def corpus(corpus_root):
    return evaluation.load_corpus(corpus_root)


def learning_docs():
    """Two same-category invoices plus one from another category."""
    a = build_invoice_doc(6, 1)   # TYRELL, single column
    b = build_invoice_doc(6, 2)
    c = build_invoice_doc(7, 1)   # CYBERDYNE
    return a, b, c


def learning_backend() -> ScriptedBackend:
    """Version-keyed answers: v1 omits invoice_number, later versions correct."""
    a, b, c = learning_docs()
    answers = {}
    for doc in (a, b):
        without = {k: v for k, v in doc["fields"].items() if k != "invoice_number"}
        answers[doc["doc_id"]] = {"v1": {"fields": without}, "*": {"fields": doc["fields"]}}
    without_c = {k: v for k, v in c["fields"].items() if k != "invoice_number"}
    answers[c["doc_id"]] = {"v1": {"fields": without_c}, "*": {"fields": c["fields"]}}
    return ScriptedBackend("m1", answers)


def learning_runtime(workdir=None, ingest=True) -> Runtime:
    docs = learning_docs()
    labeled = [(d["bundle"], CategoryLabel(d["category"][0],
                                           DocType(d["category"][1]), 1.0))
               for d in docs]
    if workdir is not None:
        Path(workdir).mkdir(parents=True, exist_ok=True)
    rt = Runtime(workdir=workdir, backends=[learning_backend()],
                 signatures=train_signatures(labeled))
    if ingest:
        for d in docs:
            rt.ingest(d["bundle"])
    return rt


def runtime_snapshot(rt: Runtime) -> str:
    """Canonical JSON of everything the service serves: queue, stats, prompt heads."""
    from dataclasses import asdict

    from madp.prompts import version_to_json
    heads = {}
    for cat in sorted(rt.prompts._heads):
        heads["/".join(cat)] = [version_to_json(v) for v in rt.prompts.lineage(cat)]
    return json.dumps({
        "queue": rt.queue(),
        "stats": asdict(rt.stats()),
        "prompts": heads,
    }, sort_keys=True)
