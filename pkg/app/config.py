import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

class Config:
    OUTPUT_DIR = os.getenv("OPFREE_OUTPUT_DIR", "results")
    SEED = int(os.getenv("OPFREE_SEED", "20240601"))

    # Tolerances: exact models vs. algebraic identities on matrix contexts
    TOL = float(os.getenv("OPFREE_TOL", "1e-8"))
    ALGEBRA_TOL = float(os.getenv("OPFREE_ALGEBRA_TOL", "1e-10"))

    NC_MAX_ORDER = int(os.getenv("OPFREE_NC_MAX_ORDER", "14"))
    CUMULANT_MAX_ORDER = int(os.getenv("OPFREE_CUMULANT_MAX_ORDER", "8"))
    COEFF_DRAWS = int(os.getenv("OPFREE_COEFF_DRAWS", "20"))
    GRID_SIZE = int(os.getenv("OPFREE_GRID_SIZE", "64"))
    WORKERS = int(os.getenv("OPFREE_WORKERS", "4"))

    LOG_LEVEL = os.getenv("OPFREE_LOG_LEVEL", "INFO")

    @property
    def OUTPUT_PATH(self) -> Path:
        return Path(self.OUTPUT_DIR)

config = Config()
