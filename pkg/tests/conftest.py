import pytest

from miot_gauge import default_catalog


@pytest.fixture(scope="session")
def catalog():
    return default_catalog()
