import pytest
import structlog

from blowup_lab.settings import get_settings


@pytest.fixture(autouse=True)
def fresh_runtime():
    """CLI runs reconfigure structlog against the current stderr; undo that between tests."""
    get_settings.cache_clear()
    yield
    structlog.reset_defaults()
    get_settings.cache_clear()


def pytest_addoption(parser):
    parser.addoption("--update-golden", action="store_true", default=False,
                     help="rewrite tests/golden/*.csv from the current output")


@pytest.fixture
def update_golden(request):
    return request.config.getoption("--update-golden", default=False)
