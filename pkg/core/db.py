from sqlalchemy import create_engine, inspect
from sqlalchemy.orm import sessionmaker, declarative_base, Session
import logging
from config import db_path


# Configure logging
logging.basicConfig(level=logging.INFO, format="%(asctime)s - %(levelname)s - %(message)s")
logger = logging.getLogger(__name__)

# Create engine DB
engine = create_engine(db_path)

# Create metadata
Base = declarative_base()

LocalSession = sessionmaker(autoflush=True, autocommit=False, bind=engine)


def get_db() -> Session:
    """Return a database session"""

    session = LocalSession()
    logger.debug("Got session")
    return session


def init_db() -> None:
    """Creates the run ledger tables if they are missing"""
    import core.model  # noqa: F401

    inspector = inspect(engine)
    existing_tables = inspector.get_table_names()

    if "property_rows" not in existing_tables:
        with engine.begin() as connection:
            Base.metadata.create_all(connection)
            logger.info("Initialization DB")
    else:
        logger.debug("Database already initialized.")
