import numpy as np
import pytest

from traceinv import SpdMatrix


def random_orthogonal(rng, n):
    Q, R = np.linalg.qr(rng.standard_normal((n, n)))
    return Q * np.sign(np.diag(R))


def spd_from_eigenvalues(rng, eigenvalues):
    """SPD matrix with a known spectrum via a random orthogonal conjugation."""
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    Q = random_orthogonal(rng, eigenvalues.size)
    return SpdMatrix.from_dense((Q * eigenvalues) @ Q.T), Q


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
