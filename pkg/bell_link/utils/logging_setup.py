from typing import Optional
from logging.handlers import RotatingFileHandler
import logging
import os

from dotenv import load_dotenv

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"
LOG_LEVEL_ENV = "BELL_LINK_LOG_LEVEL"


def setup_logging(
    out_dir: str,
    level: Optional[str] = None,
    max_bytes: int = 1024 * 1024,
    backup_count: int = 15,
) -> logging.Logger:
    """
    Attach a rotating file handler (<out_dir>/logs/run.log, everything from DEBUG) and a
    console handler to the package logger. The console level comes from BELL_LINK_LOG_LEVEL
    (a .env file is honoured), then `level`, then INFO.
    """
    load_dotenv()
    console_level = os.getenv(LOG_LEVEL_ENV) or level or "INFO"

    logger = logging.getLogger("bell_link")
    logger.setLevel(logging.DEBUG)
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()

    log_folder = os.path.join(out_dir, "logs")
    os.makedirs(log_folder, exist_ok=True)
    file_handler = RotatingFileHandler(
        os.path.join(log_folder, "run.log"),
        mode="a",
        maxBytes=max_bytes,
        backupCount=backup_count,
    )
    file_handler.setLevel(logging.DEBUG)
    file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(file_handler)

    console_handler = logging.StreamHandler()
    console_handler.setLevel(str(console_level).upper())
    console_handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(console_handler)
    return logger
