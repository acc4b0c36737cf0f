import numpy as np
import pytest

from pseudobound import core, states

# working point of the whole pipeline
A_OPT = 0.3460
EPS_OPT = 0.1069
KAPPA_H = 8.4e-5


@pytest.fixture
def rng():
    return np.random.default_rng(20260811)


@pytest.fixture
def rho_opt():
    return states.bound_entangled_state(states.StateParams.symmetric(A_OPT))


def random_params(rng, low=0.1, high=3.0):
    return states.StateParams(*rng.uniform(low, high, size=3))


def random_product_vectors(rng, n=3):
    out = []
    for _ in range(n):
        v = rng.standard_normal(2) + 1j * rng.standard_normal(2)
        out.append(v / np.linalg.norm(v))
    return out


def pure_state(vector) -> core.DensityOperator:
    v = np.asarray(vector, dtype=complex)
    return core.DensityOperator(np.outer(v, v.conj()))
