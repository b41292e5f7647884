import numpy as np
import pytest

from dsm import (
    ProblemInstance,
    make_cubic_monotone,
    make_hilbert_psd,
    make_psd_singular_linear,
    make_random_monotone,
)


@pytest.fixture(scope="session")
def rank_deficient_linear():
    return make_psd_singular_linear()


@pytest.fixture(scope="session")
def hilbert_linear():
    return make_hilbert_psd()


@pytest.fixture(scope="session")
def cubic():
    return make_cubic_monotone()


@pytest.fixture(scope="session")
def tanh_monotone():
    return make_random_monotone()


@pytest.fixture(scope="session")
def all_problems(rank_deficient_linear, hilbert_linear, cubic, tanh_monotone):
    return [rank_deficient_linear, hilbert_linear, cubic, tanh_monotone]


def identity_problem(dim=2, f=None):
    f = np.zeros(dim) if f is None else np.asarray(f, dtype=float)
    return ProblemInstance(
        dim=dim,
        operator=lambda u: u.copy(),
        data=f,
        jacobian=lambda u: np.eye(dim),
        known_solution=f.copy(),
        m2_bound=0.0,
        is_linear=True,
        is_strictly_monotone=True,
        name="identity",
    )


def diag_linear_problem(diag, f):
    m = np.diag(np.asarray(diag, dtype=float))
    return ProblemInstance(
        dim=m.shape[0],
        operator=lambda u: m @ u,
        data=np.asarray(f, dtype=float),
        jacobian=lambda u: m.copy(),
        m2_bound=0.0,
        is_linear=True,
        name="diag",
    )


def scalar_cubic_problem(f=2.0, m2_bound=12.0):
    # dim 1, operator u + u^3; strictly increasing so the root is unique
    return ProblemInstance(
        dim=1,
        operator=lambda u: u + u**3,
        data=np.array([float(f)]),
        jacobian=lambda u: np.array([[1.0 + 3.0 * u[0] ** 2]]),
        m2_bound=m2_bound,
        is_strictly_monotone=True,
        name="scalar-cubic",
    )
