import numpy as np
import pytest

from epred.algebra import AlgElem, DualElem, gauge_so3, so3, vect_s1


def smooth_field(rng, n, comps=1, modes=3):
    """Random trigonometric polynomial sampled on the n-point grid."""
    x = np.arange(n) * 2 * np.pi / n
    out = np.zeros((n, comps))
    for c in range(comps):
        out[:, c] = rng.normal() * 0.5
        for k in range(1, modes + 1):
            a, b = rng.normal(size=2) / k
            out[:, c] += a * np.cos(k * x) + b * np.sin(k * x)
    return out[:, 0] if comps == 1 else out


def random_alg(rng, desc, cls=AlgElem):
    if desc.grid_size is None:
        return cls(desc, rng.normal(size=3))
    comps = 3 if desc.kind.value == "GAUGE_SO3" else 1
    return cls(desc, smooth_field(rng, desc.grid_size, comps).reshape(-1))


def random_dual(rng, desc):
    return random_alg(rng, desc, DualElem)


def random_rotation_vector(rng, max_angle=np.pi):
    v = rng.normal(size=3)
    return v / np.linalg.norm(v) * rng.uniform(0, max_angle)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=["SO3", "VECT_S1", "GAUGE_SO3"])
def desc(request):
    return {"SO3": so3(), "VECT_S1": vect_s1(64), "GAUGE_SO3": gauge_so3(64)}[request.param]
