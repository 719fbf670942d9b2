import logging

import pandas as pd
import pytest
from sqlalchemy.orm import Session

from core.db_functions import (
    REPORT_COLUMNS,
    load_report,
    rows_to_frame,
    save_report,
    setup_logging,
    write_table,
)
from core.model import ModelPropertyRow
from core.repository import Repository
from models.report import PropertyRow


class TestRowsToFrame:
    """
    Testing the rows_to_frame function
    """

    def test_columns(self, sample_rows: list[PropertyRow]):
        frame = rows_to_frame(sample_rows)
        assert list(frame.columns) == REPORT_COLUMNS
        assert list(frame["passed"]) == [True, True, False]

    def test_empty(self):
        frame = rows_to_frame([])
        assert frame.empty
        assert list(frame.columns) == REPORT_COLUMNS


class TestSaveReport:
    """
    Testing the save_report and load_report functions
    """

    def test_save_and_load(self, sample_rows: list[PropertyRow], patched_ledger: Session, tmp_path):
        csv_path = tmp_path / "cocycle-check.csv"
        save_report(sample_rows, "run-1", "cocycle-check", str(csv_path))

        written = pd.read_csv(csv_path, keep_default_na=False)
        assert list(written.columns) == REPORT_COLUMNS
        assert written["note"].iloc[2] == "quadrature too coarse"

        stored = patched_ledger.query(ModelPropertyRow).filter_by(run_id="run-1").all()
        assert len(stored) == 3
        assert all(row.command == "cocycle-check" for row in stored)

        loaded = load_report("run-1")
        assert list(loaded["name"]) == [row.name for row in sample_rows]
        assert loaded["max_residual"].iloc[2] == pytest.approx(2e-5)

    def test_unknown_run(self, patched_ledger: Session):
        assert load_report("missing").empty

    def test_write_table(self, tmp_path):
        path = tmp_path / "values.csv"
        write_table(pd.DataFrame({"theta": [0.5], "value": [1.0 / 3.0]}), str(path))
        assert path.read_text().splitlines()[1] == "5.000000000000e-01,3.333333333333e-01"


class TestRepository:
    """
    Testing the Repository class
    """

    def test_latest_runs(self, sample_rows: list[PropertyRow], db_session: Session):
        repository = Repository(db=lambda: db_session)
        repository.insert_rows("run-a", "qm", sample_rows[:2])
        repository.insert_rows("run-b", "twist", sample_rows)
        runs = {run[0]: run for run in repository.latest_runs()}
        assert runs["run-a"][1:4] == ("qm", 2, 2)
        assert runs["run-b"][1:4] == ("twist", 3, 2)

    def test_read_and_delete(self, sample_rows: list[PropertyRow], db_session: Session):
        repository = Repository(db=lambda: db_session)
        repository.insert_rows("run-c", "h1", sample_rows)
        assert [row.name for row in repository.read_run("run-c")] == [row.name for row in sample_rows]
        repository.delete_run("run-c")
        with pytest.raises(KeyError):
            repository.read_run("run-c")

    def test_delete_unknown(self, db_session: Session):
        with pytest.raises(KeyError):
            Repository(db=lambda: db_session).delete_run("missing")


class TestSetupLogging:
    """
    Testing the setup_logging function
    """

    def test_file_handler(self, tmp_path):
        log_path = tmp_path / "lab.log"
        setup_logging(str(log_path))
        logging.getLogger("lab.test").warning("ledger ready")
        assert "ledger ready" in log_path.read_text(encoding="utf-8")
