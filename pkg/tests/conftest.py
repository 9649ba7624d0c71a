import pytest

from leopd.config import default_config


@pytest.fixture
def cfg():
    return default_config()
