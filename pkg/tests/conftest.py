import pytest


def pytest_configure(config):
    config._criterion_lines = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "_criterion_lines", [])
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)


class _CriterionRun:
    """Context manager recording exactly one PASS/FAIL line per criterion."""

    def __init__(self, config, number, description):
        self.config = config
        self.number = number
        self.description = description
        self.detail = ""

    def __enter__(self):
        return self

    def __exit__(self, etype, evalue, tb):
        ok = etype is None
        detail = self.detail or self.description
        if not ok:
            first = str(evalue).splitlines()[0][:160] if evalue else ""
            detail = f"{detail} [{etype.__name__}: {first}]"
        line = (f"criterion {self.number:02d} "
                f"{'PASS' if ok else 'FAIL'}: {detail}")
        self.config._criterion_lines.append(line)
        print(line)
        return False


@pytest.fixture(scope="session")
def criterion(request):
    def start(number, description):
        return _CriterionRun(request.config, number, description)
    return start
