import numpy as np

from crowdwise import NoiseModel, validate_network
from crowdwise.errors import NotAperiodic

REF_P = [
    [0, 0.1, 0.2, 0.7],
    [0.25, 0, 0.25, 0.5],
    [0.5, 0.5, 0, 0],
    [0.2, 0, 0.8, 0],
]
REF_SIGMA2 = [0.32**2, 0.35**2, 0.38**2, 0.29**2]

# undirected 4-cycle 0-1-2-3-0; the self-weights make it aperiodic
LAZY_CYCLE = [
    [0.5, 0.25, 0, 0.25],
    [0.25, 0.5, 0.25, 0],
    [0, 0.25, 0.5, 0.25],
    [0.25, 0, 0.25, 0.5],
]


def random_network(rng, n, density=0.5):
    """Random valid network: a random Hamiltonian cycle plus random extra edges."""
    while True:
        mask = rng.random((n, n)) < density
        perm = rng.permutation(n)
        mask[perm, np.roll(perm, -1)] = True
        W = rng.random((n, n)) * mask
        try:
            return validate_network(W / W.sum(axis=1, keepdims=True))
        except NotAperiodic:
            continue


def random_noise(rng, n):
    return NoiseModel(rng.uniform(0.05, 2.0, n))
