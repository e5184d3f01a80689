import numpy as np
import pytest

from ncgalois import groups


@pytest.fixture(scope="session")
def fixture_groups():
    return {name: make() for name, make in groups.FIXTURE_GROUPS.items()}


@pytest.fixture(scope="session")
def s3():
    return groups.symmetric_group(3)


@pytest.fixture(scope="session")
def s4():
    return groups.symmetric_group(4)


@pytest.fixture(scope="session")
def d4():
    return groups.dihedral_group(4)


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
