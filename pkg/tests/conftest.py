import functools

import pytest

from sylow_orbits.charspace import Space


@functools.lru_cache(maxsize=None)
def space(lie_type, n, p=3, k=1, c=1):
    """Shared Space instances; their tables are cached on the object."""
    return Space.make(lie_type, n, p, k, c)


@pytest.fixture
def B2():
    return space("B", 2)


@pytest.fixture
def C2():
    return space("C", 2)


@pytest.fixture
def D3():
    return space("D", 3)
