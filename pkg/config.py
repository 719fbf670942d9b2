import os

from dotenv import load_dotenv

load_dotenv()

db_path = os.getenv("LAB_DATABASE_URL", "sqlite:///lab_runs.db")  # run ledger
LAB_CONFIG_PATH = os.getenv("LAB_CONFIG_PATH", "lab.yaml")
LAB_LOG_PATH = os.getenv("LAB_LOG_PATH", "lab.log")
LAB_OUT_DIR = os.getenv("LAB_OUT_DIR", "reports")
