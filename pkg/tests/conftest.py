import numpy as np
import pytest

from maxstab.norms import NormSpec
from maxstab.spectral import AngularMeasure, DeHaanRepresenter


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_angular_measure(rng, dim, alpha, n_atoms=None, norm=None) -> AngularMeasure:
    """Random normalized measure: normalize a representer, then project it."""
    Z = random_representer(rng, dim, alpha, n_atoms)
    from maxstab.spectral import angular_from_representer
    return angular_from_representer(Z, norm or NormSpec.lp(alpha))


def random_representer(rng, dim, alpha, n_atoms=None) -> DeHaanRepresenter:
    """Random law with unit alpha-moments: rescale coordinates to enforce them."""
    m = n_atoms or int(rng.integers(2, 9))
    pts = rng.uniform(0.05, 2.0, size=(m, dim))
    # zero out a few entries but keep every row and column alive
    mask = rng.random((m, dim)) < 0.15
    for r in range(m):
        if mask[r].all():
            mask[r, rng.integers(0, dim)] = False
    for c in range(dim):
        if mask[:, c].all():
            mask[rng.integers(0, m), c] = False
    pts[mask] = 0.0
    probs = rng.dirichlet(np.ones(m))
    moments = (probs[:, None] * pts ** alpha).sum(axis=0)
    pts = pts / moments ** (1.0 / alpha)
    return DeHaanRepresenter(dim=dim, alpha=alpha, points=pts, probs=probs)
