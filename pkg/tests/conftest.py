import numpy as np
import pytest

from app import create_app
from idempotents import IdempotentFamily
from rings import GF, MatrixAlgebra, Zmod
from steinberg import WordContext


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def make_context():
    """Factory for word contexts over M(size, base) with the matrix-unit family"""

    def make(base, size, system="plain", scale=1, level=0):
        family = IdempotentFamily.matrix_units(MatrixAlgebra(base, size))
        return WordContext(family, system, scale, level)

    return make


@pytest.fixture
def m4f2(make_context):
    return make_context(Zmod(2), 4)


@pytest.fixture
def m3z4(make_context):
    return make_context(Zmod(4), 3)


@pytest.fixture
def m3f3(make_context):
    return make_context(GF(3, [1, 0]), 3)


@pytest.fixture
def blocked_m2m2f3():
    """M(2, M(2, F_3)) with the two 2x2 diagonal blocks as idempotents"""
    algebra = MatrixAlgebra(Zmod(3), 4, block_size=2)
    return WordContext(IdempotentFamily.default(algebra))


@pytest.fixture
def app(tmp_path):
    app = create_app({
        "TESTING": True,
        "SQLALCHEMY_DATABASE_URI": f"sqlite:///{tmp_path / 'sforge.db'}",
        "SQLALCHEMY_ENGINE_OPTIONS": {},
        "SFORGE_OUT": str(tmp_path / "runs"),
    })
    yield app


@pytest.fixture
def runner(app):
    return app.test_cli_runner()


@pytest.fixture
def client(app):
    return app.test_client()
