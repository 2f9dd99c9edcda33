import numpy as np
import pytest

from chen_bounds.ambient import AmbientPoint, FCoefficients
from chen_bounds.forge import GeneratorSpec, make_instance
from chen_bounds.submanifold import build_submanifold, normal_completion


def unit_f1(f1=1.0):
    return FCoefficients(f1, 0.0, f1 - 1.0, 0.0, 0.0, 0.0, 0.0)


def diagonal_instance(diag, m=None, f1=1.0):
    """Instance whose first normal carries diag(...) and every other free normal is zero."""
    n = len(diag)
    m = m or n
    A = AmbientPoint.canonical(m, unit_f1(f1))
    E = np.eye(A.dim)[:n]
    free = np.zeros((A.dim - n - 1, n, n))
    free[0] = np.diag(diag)
    return build_submanifold(A, E, normal_completion(A, E), free)


def instance(**kw):
    return make_instance(GeneratorSpec(**kw))


@pytest.fixture
def d1233():
    return diagonal_instance([1.0, 2.0, 3.0, 3.0])


def random_instances(count, seed=0, modes=("general", "sasakian"), ns=(3, 4, 5)):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = int(rng.choice(ns))
        m = int(rng.integers(n, 6))
        out.append(instance(
            m=m, n=n, mode=modes[i % len(modes)], seed=i + 1000 * seed,
            frame="rotated" if i % 3 else "adapted", conjugate=bool(i % 2),
        ))
    return out
