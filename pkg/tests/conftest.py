import functools
import re

import pytest

from satflux.pde import SchemeConfig, run
from satflux.presets import get_preset

_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


@pytest.fixture
def criterion(request):
    """Record one acceptance check; fails the test when ``ok`` is false."""

    def record(label, ok, detail):
        line = f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}"
        request.config.stash[_LINES].append((label, bool(ok), detail))
        print(line)
        assert ok, line

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    groups = {}
    for label, ok, detail in lines:
        num = int(re.match(r"\d+", label).group())
        groups.setdefault(num, []).append((label, ok, detail))
    terminalreporter.section("acceptance criteria")
    for num in sorted(groups):
        parts = groups[num]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{p[0]}: {p[2]}" if p[0] != str(num) else p[2] for p in parts)
        terminalreporter.write_line(f"criterion {num:>2}: {'PASS' if ok else 'FAIL'}  {detail}")


@functools.lru_cache(maxsize=None)
def _preset_equilibrium(name, index, N):
    spec = get_preset(name)[index]
    return run(spec.initial_state(N), SchemeConfig(N=N))


@pytest.fixture(scope="session")
def preset_equilibrium():
    """Cached ``run`` of a preset to equilibrium at grid size ``N``."""
    return _preset_equilibrium
