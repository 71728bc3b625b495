import pytest

from absmc import corpus


@pytest.fixture(scope="session")
def figs():
    return {name: corpus.load(name) for name in corpus.NAMES}
