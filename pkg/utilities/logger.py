# logger.py
import logging
import sys
from datetime import datetime

from market_base.settings import get_settings


class LoggerFactory:
    reset_color = '\x1b[0m'
    timestamp_color = '\x1b[35m'
    location_color = '\x1b[36m'
    message_color = '\x1b[30m'

    level_colors = {
        'DEBUG': '\x1b[34m',
        'INFO': '\x1b[32m',
        'WARNING': '\x1b[33m',
        'ERROR': '\x1b[31m',
        'CRITICAL': '\x1b[41m'
    }

    @staticmethod
    def get_logger(name: str = None):
        """
        Logger writing to stderr at the level configured by STABLE_MARKET_LOG_LEVEL.
        stdout stays free for the JSON documents the CLI prints; colors are used only
        when stderr is a terminal.
        """
        logger = logging.getLogger(name)
        logger.setLevel(get_settings().log_level.upper())

        if not logger.handlers:
            handler = logging.StreamHandler(sys.stderr)
            colored = hasattr(sys.stderr, "isatty") and sys.stderr.isatty()
            handler.setFormatter(LoggerFactory.CustomFormatter(colored=colored))
            logger.addHandler(handler)

        return logger

    class CustomFormatter(logging.Formatter):
        def __init__(self, colored: bool = True):
            super().__init__()
            self.colored = colored

        def _paint(self, color: str, text: str) -> str:
            return f"{color}{text}{LoggerFactory.reset_color}" if self.colored else text

        def format(self, record):
            timestamp = datetime.fromtimestamp(record.created).strftime('%d-%m-%Y %H:%M:%S')
            level = self._paint(LoggerFactory.level_colors.get(record.levelname, ''), f"[{record.levelname}]")
            stamp = self._paint(LoggerFactory.timestamp_color, f"[{timestamp}]")
            location = self._paint(LoggerFactory.location_color, f"{record.filename}:{record.lineno}")
            message = self._paint(LoggerFactory.message_color, record.getMessage())

            line = f"{level} {stamp} {location} : {message}"
            return f"{line}\n" + "-" * 100 if self.colored else line
