import logging
import os
from typing import Optional, Tuple

from dotenv import load_dotenv

# Load .env from the project root (parent of laxkit)
# laxkit/core/config.py -> laxkit/core -> laxkit -> project root -> .env
load_dotenv(dotenv_path=os.path.join(os.path.dirname(os.path.dirname(os.path.dirname(__file__))), ".env"))

# Fallback: try loading from current working directory
load_dotenv()

logger = logging.getLogger(__name__)


def _env_bool(name: str, default: bool) -> bool:
    raw = os.getenv(name)
    if raw is None:
        return default
    return raw.strip().lower() in {"1", "true", "yes", "on"}


def _env_int(name: str, default: Optional[int]) -> Optional[int]:
    raw = os.getenv(name)
    if raw is None or not raw.strip():
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Ignoring non-integer %s=%r", name, raw)
        return default


def parse_window(text: str) -> Tuple[int, int]:
    """Parses "LO:HI" into an inclusive integer window."""
    parts = text.split(":")
    if len(parts) != 2:
        raise ValueError(f"window must look like LO:HI, got {text!r}")
    lo, hi = int(parts[0]), int(parts[1])
    if lo > hi:
        raise ValueError(f"window lower end {lo} exceeds upper end {hi}")
    return lo, hi


class Settings:
    WINDOW: str = os.getenv("LAXKIT_WINDOW", "-6:6")
    JOBS: int = _env_int("LAXKIT_JOBS", 1)
    SEED: int = _env_int("LAXKIT_SEED", 0) or 0
    SAMPLE_BUDGET: int = _env_int("LAXKIT_SAMPLE_BUDGET", 20) or 20
    # None means 2g - 1 + H + 1, decided per configuration
    BUMP_LIMIT: Optional[int] = _env_int("LAXKIT_BUMP_LIMIT", None)
    # also try removing poles at Q_M once adding them fails
    BUMP_DOWNWARD: bool = _env_bool("LAXKIT_BUMP_DOWNWARD", False)
    CONNECTION_BUDGET: int = _env_int("LAXKIT_CONNECTION_BUDGET", 8) or 8
    LOG_LEVEL: str = os.getenv("LAXKIT_LOG_LEVEL", "WARNING")
    OUTPUT_DIR: str = os.getenv("LAXKIT_OUT", "out")
    # Timing makes reports differ between runs, so it is opt-in
    REPORT_TIMING: bool = _env_bool("LAXKIT_REPORT_TIMING", False)

    @property
    def window(self) -> Tuple[int, int]:
        return parse_window(self.WINDOW)


settings = Settings()
