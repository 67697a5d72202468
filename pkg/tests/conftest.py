import pytest

from sbndkit.channel import ChannelParams
from sbndkit.codes import bch_code


@pytest.fixture(scope="session")
def bch31():
    return bch_code(5, 2)


@pytest.fixture(scope="session")
def bch15():
    return bch_code(4, 2)


@pytest.fixture(scope="session")
def bch7():
    return bch_code(3, 1)


@pytest.fixture(scope="session")
def params31_3db(bch31):
    return ChannelParams.for_code(bch31, 3.0)


@pytest.fixture(scope="session")
def params15_3db(bch15):
    return ChannelParams.for_code(bch15, 3.0)
