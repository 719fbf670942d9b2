from core.db import get_db
from core.model import ModelPropertyRow
from sqlalchemy import Integer, cast, delete, func, select
from models.report import PropertyRow
import logging

logger = logging.getLogger(__name__)


class Repository:
    """
    A class to manage the run ledger.

    Attributes:
        conn (Session): open database session.
    """

    def __init__(self, db=get_db) -> None:
        """
        Initializes.

        Args:
            db: function returning a database session
        """
        self.conn = db()

    def insert_rows(self, run_id: str, command: str, rows: list[PropertyRow]) -> None:
        """
        Insert the property rows of one run.

        Attributes:
        run_id (str): identifier of the run.
        command (str): CLI command that produced the rows.
        rows (list[PropertyRow]): checked properties.
        """
        self.conn.add_all(
            ModelPropertyRow(run_id=run_id, command=command, **row.model_dump()) for row in rows
        )
        self.conn.commit()
        logger.info(f"Insert {len(rows)} rows of run {run_id}")

    def read_run(self, run_id: str) -> list[ModelPropertyRow]:
        """
        Reads the rows of a run.

        Attributes:
            run_id (str): identifier of the run

        Returns:
            list[ModelPropertyRow]: rows in insertion order.
        """
        rows = (
            self.conn.execute(
                select(ModelPropertyRow)
                .where(ModelPropertyRow.run_id == run_id)
                .order_by(ModelPropertyRow.id_key)
            )
            .scalars()
            .all()
        )
        if rows:
            logger.info(f"Reading run {run_id}")
            return list(rows)
        else:
            logger.info(f"Run {run_id} not found")
            raise KeyError("Run Not Found")

    def latest_runs(self, limit: int = 10) -> list[tuple]:
        """
        Summaries of the most recent runs.

        Returns:
            list[tuple]: (run_id, command, rows, passed rows, started at).
        """
        started = func.min(ModelPropertyRow.created_at)
        query = (
            select(
                ModelPropertyRow.run_id,
                ModelPropertyRow.command,
                func.count(ModelPropertyRow.id_key),
                func.sum(cast(ModelPropertyRow.passed, Integer)),
                started,
            )
            .group_by(ModelPropertyRow.run_id, ModelPropertyRow.command)
            .order_by(started.desc())
            .limit(limit)
        )
        return [tuple(row) for row in self.conn.execute(query).all()]

    def delete_run(self, run_id: str) -> None:
        """
        Delete the rows of a run.

        Attributes:
            run_id (str): identifier of the run
        """
        self.read_run(run_id)
        self.conn.execute(delete(ModelPropertyRow).where(ModelPropertyRow.run_id == run_id))
        self.conn.commit()
        logger.info(f"Deleted run {run_id}")
