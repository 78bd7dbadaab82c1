import pytest

from psrkit import toy_motorcycle


@pytest.fixture(scope="session")
def toy():
    return toy_motorcycle()
