import logging
import os
from logging.handlers import RotatingFileHandler
from typing import Iterable

import pandas as pd
from sqlalchemy import create_engine
from sqlalchemy.orm import sessionmaker

from config import db_path
from core.model import ModelPropertyRow
from models.report import PropertyRow

pd.set_option("display.max_colwidth", 60)
pd.set_option("display.width", 160)

REPORT_COLUMNS = ["name", "sample_size", "max_residual", "threshold", "passed", "note"]


class FlushFileHandler(logging.FileHandler):
    """
    Custom FileHandler that flushes after every log message.
    """

    def emit(self, record) -> None:
        super().emit(record)
        self.flush()


# Set FlushFileHandler, work as RotatingFileHandler
class FlushRotatingFileHandler(FlushFileHandler, RotatingFileHandler):
    pass


def setup_logging(log_file_path: str, level: int = logging.INFO) -> None:
    """
    Log to the console and to a flush-on-emit rotating file (1 MB, 5 backups).

    Args:
    log_file_path (str): path of the log file.
    level (int): root logging level.
    """
    logging.basicConfig(
        level=level,
        format="%(asctime)s - %(levelname)s - %(message)s",
        handlers=[logging.StreamHandler()],
    )
    root = logging.getLogger()
    # delete standard FileHandler
    for handler in list(root.handlers):
        if isinstance(handler, logging.FileHandler):
            root.removeHandler(handler)

    max_log_file_size = 1 * 1024 * 1024  # 1 MB
    backup_count = 5  # Number of backup copies
    rotating = FlushRotatingFileHandler(
        os.path.abspath(log_file_path),
        mode="a",
        encoding="utf-8",
        maxBytes=max_log_file_size,
        backupCount=backup_count,
    )
    rotating.setFormatter(logging.Formatter("%(asctime)s - %(levelname)s - %(message)s"))
    root.addHandler(rotating)


def rows_to_frame(rows: Iterable[PropertyRow]) -> pd.DataFrame:
    """
    Tabulate property rows.

    Args:
    rows (Iterable[PropertyRow]): checked properties.

    Returns:
    pd.DataFrame: one line per property with REPORT_COLUMNS.
    """
    return pd.DataFrame([row.model_dump() for row in rows], columns=REPORT_COLUMNS)


def save_report(
    rows: list[PropertyRow],
    run_id: str,
    command: str,
    csv_path: str,
) -> pd.DataFrame:
    """
    Write the rows to CSV and record them in the run ledger.

    Args:
    rows (list[PropertyRow]): checked properties.
    run_id (str): identifier of the run.
    command (str): CLI command name.
    csv_path (str): CSV output path.

    Returns:
    pd.DataFrame: the written table.
    """
    frame = rows_to_frame(rows)
    frame.to_csv(csv_path, index=False, float_format="%.6e")
    logging.info(f"Wrote {len(frame)} rows to {csv_path}")

    engine = create_engine(db_path)
    Session = sessionmaker(bind=engine)
    session = Session()
    try:
        session.add_all(
            ModelPropertyRow(run_id=run_id, command=command, **row.model_dump()) for row in rows
        )
        session.commit()
        logging.info(f"Stored run {run_id} in the ledger")
    finally:
        session.close()
    return frame


def load_report(run_id: str) -> pd.DataFrame:
    """
    Read the rows of a run back from the ledger.

    Args:
    run_id (str): identifier of the run.

    Returns:
    pd.DataFrame: rows with REPORT_COLUMNS, empty when the run is unknown.
    """
    engine = create_engine(db_path)
    Session = sessionmaker(bind=engine)
    session = Session()
    try:
        stored = (
            session.query(ModelPropertyRow)
            .filter_by(run_id=run_id)
            .order_by(ModelPropertyRow.id_key)
            .all()
        )
        return pd.DataFrame([row.to_dict() for row in stored], columns=REPORT_COLUMNS)
    finally:
        session.close()


def write_table(frame: pd.DataFrame, csv_path: str) -> None:
    """Write a value table (not property rows) with fixed float formatting."""
    frame.to_csv(csv_path, index=False, float_format="%.12e")
    logging.info(f"Wrote {len(frame)} rows to {csv_path}")
