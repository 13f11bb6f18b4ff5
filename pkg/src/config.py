"""
config.py
---------
Resource caps and run defaults, read from the environment (.env supported).
"""
from dotenv import load_dotenv
import os

load_dotenv()

TOOL_VERSION = "0.4.0"


def _int_setting(name: str, default: int, allow_zero: bool = False) -> int:
    raw = os.getenv(name)
    if raw is None or raw.strip() == "":
        return default
    try:
        value = int(raw)
    except ValueError:
        raise RuntimeError(f"{name} must be an integer (got {raw!r}), please fix .env")
    if value < 0 or (value == 0 and not allow_zero):
        raise RuntimeError(f"{name} must be positive (got {value}), please fix .env")
    return value


MONOID_CAP = _int_setting("SEPARATION_CAP_MONOID", 50_000)
DET_CAP = _int_setting("SEPARATION_CAP_DET", 2 ** 20)
LABEL_CAP = _int_setting("SEPARATION_CAP_LABELS", 2_000_000)
TABLE_CELL_CAP = _int_setting("SEPARATION_CAP_TABLE_CELLS", 25_000_000)
SET_CACHE_CAP = _int_setting("SEPARATION_CAP_SET_CACHE", 1_000_000, allow_zero=True)  # memoised set products
NAIVE_MAX_N = _int_setting("SEPARATION_NAIVE_MAX_N", 12)
WALL_TIME = _int_setting("SEPARATION_WALL_TIME", 0, allow_zero=True)  # seconds, 0 = no limit
DEFAULT_SEED = _int_setting("SEPARATION_SEED", 20240517, allow_zero=True)
OUTPUT_DIR = os.getenv("SEPARATION_OUTPUT_DIR", "Data/results")
LOG_LEVEL = os.getenv("SEPARATION_LOG_LEVEL", "INFO").upper()

if LOG_LEVEL not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
    raise RuntimeError(f"SEPARATION_LOG_LEVEL {LOG_LEVEL!r} is not a logging level, please fix .env")
