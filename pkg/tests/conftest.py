import numpy as np
import pytest
from hypothesis import settings

import mixedtopo as mt

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def qwz():
    return mt.qwz_model()


@pytest.fixture(scope="session")
def atomic():
    return mt.atomic_model()


@pytest.fixture(scope="session")
def qwz_gap(qwz):
    return mt.band_gap(qwz, mt.MomentumGrid(64, 64), 0.0)


def random_hermitian(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return (a + a.conj().T) / 2


def random_unitary(rng, n):
    a = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    q, r = np.linalg.qr(a)
    return q * (np.diagonal(r) / np.abs(np.diagonal(r))).conj()
