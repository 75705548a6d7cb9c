import pytest

from srsbs.tag import generate_gold_set


@pytest.fixture(scope="session")
def gold_set():
    return generate_gold_set()
