import pytest

from quadplane.db import CoefficientDatabase


@pytest.fixture(scope="session")
def db() -> CoefficientDatabase:
    return CoefficientDatabase.load()


@pytest.fixture(scope="session")
def model(db):
    return db.aero_model


@pytest.fixture(scope="session")
def thrust_map(db):
    return db.thrust_map


@pytest.fixture(scope="session")
def geometry(db):
    return db.geometry


@pytest.fixture(scope="session")
def atmosphere(db):
    return db.atmosphere
