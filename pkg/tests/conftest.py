import pytest
from sqlalchemy import create_engine
from sqlalchemy.orm import Session, sessionmaker

from core.fuchsian import OctagonPresentation
from core.model import ModelPropertyRow
from models.experiment import BumpSpec, ExperimentConfig, Samples


@pytest.fixture(scope="session")
def group() -> OctagonPresentation:
    """
    A fixture that provides one group for the whole session, so balls are grown once.
    """

    return OctagonPresentation()


@pytest.fixture
def small_config() -> ExperimentConfig:
    """
    A fixture that provides a config with desk-scale sample budgets.
    """

    return ExperimentConfig(
        seed=7,
        forms={
            "alpha": [BumpSpec(center=(0.0, 0.0), radius=0.6, kind="oneform-x")],
            "exact": [BumpSpec(center=(0.1, 0.1), radius=0.5, kind="exact")],
            "bump1": [BumpSpec(center=(0.25, 0.1), radius=0.5, kind="twoform")],
        },
        cocycle_forms=["bump1"],
        samples=Samples(
            qm_ball=2,
            qm_pairs=200,
            homogeneity_powers=3,
            homomorphism_pairs=50,
            euler_triples=20,
            cocycle_quadruples=10,
            invariance_ball=2,
            invariance_movers=4,
            invariance_triples=10,
            psi_samples=2000,
            twist_points=20,
            equivariance_points=10,
            action_triples=50,
            region_grid=2,
            orbit_steps=4,
        ),
    )


@pytest.fixture
def db_session() -> Session:
    """
    A fixture that creates and provides a database session for testing.
    """

    engine = create_engine("sqlite:///:memory:")
    ModelPropertyRow.metadata.create_all(engine)
    test_session = sessionmaker(bind=engine)
    session = test_session()
    yield session
    session.close()
