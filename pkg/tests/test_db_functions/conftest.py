import pytest

from models.report import PropertyRow


@pytest.fixture
def sample_rows() -> list[PropertyRow]:
    """
    A fixture that provides property rows of one run, one of them failing.
    """

    return [
        PropertyRow.check("relator evaluates to 1", 1, 3e-15, 1e-9),
        PropertyRow.check("Or cocycle identity", 1000, 0.0, 0.0),
        PropertyRow.check("bump1 invariance", 500, 2e-5, 1e-6, note="quadrature too coarse"),
    ]


@pytest.fixture
def patched_ledger(db_session, monkeypatch):
    """
    A fixture that points the ledger functions at the in-memory session.
    """

    monkeypatch.setattr("core.db_functions.create_engine", lambda x: db_session.bind)
    monkeypatch.setattr("core.db_functions.sessionmaker", lambda bind: lambda: db_session)
    return db_session
