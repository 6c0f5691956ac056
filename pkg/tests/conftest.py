import pytest

from mvgt import numkit as nk


@pytest.fixture(autouse=True)
def _clean_tape():
    nk.get_tape().clear()
    yield
    nk.get_tape().clear()
