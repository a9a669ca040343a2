from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from wordrank.bridge import load_config, open_indexes
from wordrank.corpus import load_corpus
from wordrank.indexer import run_indexing

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.function_scoped_fixture]
)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
BOOKS_QUERY = "description:Java AND description:Programmer"


@pytest.fixture(scope="session")
def books_corpus():
    return load_corpus(DATA / "books.jsonl")


@pytest.fixture(scope="session")
def books_config():
    return load_config(DATA / "books.cfg")


@pytest.fixture(scope="session")
def books_indexes(tmp_path_factory, books_corpus, books_config):
    root = tmp_path_factory.mktemp("books")
    run_indexing(books_corpus, books_config.function, root, books_config, message=lambda m: None)
    return open_indexes(root, ["description", "title"])


# -- acceptance reporting -------------------------------------------------------------
# Tests marked ``criterion(number, title)`` get one PASS/FAIL line in the
# terminal summary, with an optional detail string set through ``detail``.

_criteria: dict[int, tuple[str, str, str]] = {}
_details: dict[str, str] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): numbered acceptance criterion")


@pytest.fixture()
def detail(request):
    def set_detail(text: str) -> None:
        _details[request.node.nodeid] = text

    return set_detail


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _criteria[number] = (title, status, _details.get(item.nodeid, ""))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(_criteria):
        title, status, info = _criteria[number]
        line = f"criterion {number}: {status}  {title}"
        terminalreporter.write_line(line + (f"  [{info}]" if info else ""))
