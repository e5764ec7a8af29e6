import pytest

from iolama import make_builtin

BUILTINS = ("bpsk", "qpsk", "16qam", "64qam", "8psk", "16psk")


@pytest.fixture(scope="session", params=BUILTINS)
def builtin(request):
    return make_builtin(request.param)


@pytest.fixture(scope="session")
def qpsk():
    return make_builtin("qpsk")


@pytest.fixture(scope="session")
def bpsk():
    return make_builtin("bpsk")
