import numpy as np
import pytest

from corostab import materials


CATALOG_PARAMS = {
    "exp_hencky": {"mu": 1.0, "lambda_lame": 2.0, "k": 1.0, "khat": 1.0},
    "quadratic_hencky": {"E": 1.0, "nu": 0.3},
    "neo_hooke_vol_iso": {"mu": 1.0, "kappa": 1.0},
    "neo_hooke_incompressible": {"mu": 1.0},
    "quadratic_hencky_incompressible": {"mu": 1.0},
    "exp_hencky_incompressible": {"mu": 1.0, "k": 1.0},
}


@pytest.fixture(scope="session")
def catalog():
    return {k: materials.instantiate_model(k, p) for k, p in CATALOG_PARAMS.items()}


@pytest.fixture(scope="session")
def compressible_models(catalog):
    return [m for m in catalog.values() if not m.incompressible]


@pytest.fixture(scope="session")
def incompressible_models(catalog):
    return [m for m in catalog.values() if m.incompressible]


def random_spd(rng, scale=1.0):
    """Random SPD matrix with eigenvalues roughly in [e^-scale, e^scale]."""
    A = rng.standard_normal((3, 3))
    Q, _ = np.linalg.qr(A)
    d = np.exp(rng.uniform(-scale, scale, size=3))
    return (Q * d) @ Q.T


def random_rotation(rng):
    Q, R = np.linalg.qr(rng.standard_normal((3, 3)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[:, 0] = -Q[:, 0]
    return Q
