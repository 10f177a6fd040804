import logging
import sys
from typing import Optional

_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"


def configure_logging(level: Optional[str] = None) -> None:
    """Installs one stderr handler on the package logger; stdout stays reserved for reports."""
    from .config import settings

    root = logging.getLogger("laxkit")
    root.setLevel((level or settings.LOG_LEVEL).upper())
    if not any(getattr(h, "_laxkit", False) for h in root.handlers):
        handler = logging.StreamHandler(sys.stderr)
        handler.setFormatter(logging.Formatter(_FORMAT))
        handler._laxkit = True  # type: ignore[attr-defined]
        root.addHandler(handler)
