import pytest

import blender_forge as bf


@pytest.fixture(scope="session")
def base():
    return bf.reference_cycle()


@pytest.fixture(scope="session")
def solution(base):
    return bf.solve_parameters(base, 0.01, 40)


@pytest.fixture(scope="session")
def model(base, solution):
    return bf.unfolded_model(base, solution)


@pytest.fixture(scope="session")
def pair(model, solution):
    a = bf.find_periodic(model, solution.m, solution.nprime)
    b = bf.find_periodic(model, solution.m + 1, solution.n)
    return a, b


@pytest.fixture(scope="session")
def homoclinic_cert(model, pair):
    a, b = pair
    return bf.strong_homoclinic_certificate(model, a, b, tol=1e-8, max_steps=200)


@pytest.fixture(scope="session")
def region(model, pair, homoclinic_cert):
    a, _ = pair
    return bf.build_blender(model, a, homoclinic_cert, k=8)
