from fractions import Fraction

import pytest

from osserman_lab.envelopes import Nonlinearity, ProblemSpec, SymbolicProfile, ZeroProfile


def make_spec(p=2, n=3, lam=2, k=0, l=0, mu=0, m=0, g=None, b=None, q=None, **kw):
    """Symbolic spec with b ~ r^k log^m r and q ~ r^l log^mu r."""
    if b is None:
        b = SymbolicProfile.power_log(1.0, k, m) if k is not None else ZeroProfile()
    if q is None:
        q = SymbolicProfile.power_log(1.0, l, mu)
    if g is None:
        g = Nonlinearity.power(lam)
    return ProblemSpec(Fraction(p), n, b, q, g, **kw)


@pytest.fixture
def spec_factory():
    return make_spec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    from test_acceptance import ACCEPTANCE_KEY

    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance")
        for line in lines:
            terminalreporter.write_line(line)
