import pytest

import cantoract as ca


@pytest.fixture(scope="session")
def odo2():
    return ca.odometer(2)


@pytest.fixture(scope="session")
def odo3():
    return ca.odometer(3)


@pytest.fixture(scope="session")
def dih():
    return ca.dihedral()


@pytest.fixture(scope="session")
def frag():
    return ca.fragmented()


@pytest.fixture(scope="session")
def hei2():
    return ca.heisenberg(2)


@pytest.fixture(scope="session")
def toral22():
    return ca.toral(2, 2)


@pytest.fixture(scope="session")
def fat():
    return ca.fat_cantor()


@pytest.fixture(scope="session")
def adding():
    return ca.adding_machine_chain(2)


def word(chain, text):
    return ca.parse_word(text, chain.alphabet)
