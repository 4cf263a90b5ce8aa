import mpmath
import pytest

mpmath.mp.dps = 50


def ih_cdf_exact(x, n):
    """Irwin-Hall cdf from the alternating sum, in 50-digit arithmetic."""
    x = mpmath.mpf(x)
    if x <= 0:
        return mpmath.mpf(0)
    if x >= n:
        return mpmath.mpf(1)
    total = mpmath.mpf(0)
    for k in range(int(mpmath.floor(x)) + 1):
        total += (-1) ** k * mpmath.binomial(n, k) * (x - k) ** n
    return total / mpmath.factorial(n)


@pytest.fixture
def ih_exact():
    return ih_cdf_exact


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
