import pytest

from balans import Substitution


@pytest.fixture(scope="session")
def thue_morse():
    return Substitution.parse("0->01;1->10")


@pytest.fixture(scope="session")
def fibonacci():
    return Substitution.parse("0->01;1->0")


@pytest.fixture(scope="session")
def chacon():
    return Substitution.parse("1->1123;2->23;3->123")


@pytest.fixture(scope="session")
def toeplitz():
    return Substitution.parse("0->01;1->00")


@pytest.fixture(scope="session")
def balanced_ternary():
    # rational frequencies (1/2, 1/3, 1/6), no divisibility obstruction
    return Substitution.parse("0->010;1->102;2->201")
