from datetime import datetime

from sqlalchemy import Boolean, Column, DateTime, Float, Integer, String
from core.db import Base


class ModelPropertyRow(Base):

    __tablename__ = "property_rows"
    id_key = Column(Integer, primary_key=True, autoincrement=True, name="id_key")
    run_id = Column(String, default="", index=True, name="run_id")
    command = Column(String, default="", name="command")
    name = Column(String, default="", name="property")
    sample_size = Column(Integer, default=0, name="sample_size")
    max_residual = Column(Float, default=0.0, name="max_residual")
    threshold = Column(Float, default=0.0, name="threshold")
    passed = Column(Boolean, default=False, name="passed")
    note = Column(String, default="", name="note")
    created_at = Column(DateTime, default=datetime.utcnow, name="created_at")

    def to_dict(self) -> dict:
        """
        Convert the ModelPropertyRow instance to a dictionary.

        Returns:
        Dict[str, object]: the property row without database keys.
        """
        return {
            "name": self.name,
            "sample_size": self.sample_size,
            "max_residual": self.max_residual,
            "threshold": self.threshold,
            "passed": self.passed,
            "note": self.note or "",
        }
