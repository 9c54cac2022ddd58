import numpy as np
import pytest

from glowrl.linalg import RngStream, random_unitary


@pytest.fixture
def rng():
    return RngStream(20240817, 0).generator()


def random_density(dim, rng, rank=None):
    """Random full- or fixed-rank density matrix (Haar basis, Dirichlet weights)."""
    rank = rank or dim
    w = rng.dirichlet(np.ones(rank))
    u = random_unitary(dim, rng)
    vecs = u[:, :rank]
    return (vecs * w) @ vecs.conj().T


def random_projector_povm_element(dim, rank, rng):
    u = random_unitary(dim, rng)
    return u[:, :rank] @ u[:, :rank].conj().T
