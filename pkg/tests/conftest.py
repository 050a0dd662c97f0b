import pytest

from tcequilibrium.model import AgentParams

_CRITERIA: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, ok: bool, detail: str) -> None:
    prev = _CRITERIA.get(number)
    if prev is not None:
        ok = ok and prev[0]
        detail = f"{prev[1]}; {detail}"
    _CRITERIA[number] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


def agent_with_discount(alpha: float, beta_tilde: float, sigma: float = 0.0, mu: float = 0.0,
                        theta0: float = 0.5, y0: float = 0.0) -> AgentParams:
    """An agent whose effective discount equals beta_tilde."""
    beta = beta_tilde - alpha * mu + 0.5 * alpha**2 * sigma**2
    return AgentParams(alpha, beta, mu, sigma, theta0, y0)


@pytest.fixture
def case2_agents():
    """alpha = (1, 1), effective discounts (0.1, 0.3), income noise sigma = 0.1."""
    return (AgentParams(1.0, 0.1, 0.005, 0.1, 0.5, 1.0),
            AgentParams(1.0, 0.3, 0.005, 0.1, 0.5, 1.0))


@pytest.fixture
def no_trade_agents():
    return agent_with_discount(1.0, 0.2), agent_with_discount(1.0, 0.21)
