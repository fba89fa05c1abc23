import pytest

from factoria.acceptance import AcceptanceContext
from factoria.dirichlet import PrecisionContext
from factoria.factorset import FactorSetSpec
from factoria.spectral import spectral_constants


@pytest.fixture(scope="session")
def actx():
    """Shared memo of heavy computations across the acceptance module."""
    return AcceptanceContext()


@pytest.fixture(scope="session")
def ctx40():
    return PrecisionContext(working_digits=40, target_digits=25)


@pytest.fixture(scope="session")
def constants_all(ctx40):
    return spectral_constants(FactorSetSpec.all_integers(), ctx40)


@pytest.fixture(scope="session")
def constants_primes(ctx40):
    return spectral_constants(FactorSetSpec.primes(), ctx40)
