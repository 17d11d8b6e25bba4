from collections import OrderedDict

import pytest

from emsimon.cipher import EmInstance, EmKey
from emsimon.f2linalg import BitWord
from emsimon.galois import parse_lut

LUT3 = "52367401"
LUT4 = "E4B238091A7F6C5D"


def bw(s):
    return BitWord.parse(s)


@pytest.fixture
def em3():
    return EmInstance(parse_lut(LUT3, 3), EmKey(bw("010"), bw("110")))


@pytest.fixture
def em4():
    return EmInstance(parse_lut(LUT4, 4), EmKey(bw("0101"), bw("1101")))


# -- acceptance reporting -----------------------------------------------------
# Tests marked ``acceptance(number, title)`` are folded into one PASS/FAIL line
# per criterion at the end of the run.

_criteria = OrderedDict()


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    number, title = mark.args
    entry = _criteria.setdefault(number, {"title": title, "parts": []})
    entry["parts"].append((item.name, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        ok = all(passed for _, passed in entry["parts"])
        failed = [name for name, passed in entry["parts"] if not passed]
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {entry['title']}"
        if failed:
            line += f"  [failed: {', '.join(failed)}]"
        terminalreporter.write_line(line)
