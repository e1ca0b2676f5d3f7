import logging
import sys
from pathlib import Path
from typing import Any, TextIO

# Syslog priority number to standard logging level
LEVELS = {
    0: logging.CRITICAL,
    1: logging.CRITICAL,
    2: logging.CRITICAL,
    3: logging.ERROR,
    4: logging.WARNING,
    5: logging.INFO,
    6: logging.INFO,
    7: logging.DEBUG}

_logger = logging.getLogger('mdaml')
_logger.setLevel(logging.DEBUG)
_logger.addHandler(logging.NullHandler())
_destination: dict[str, Any] = {'active': False, 'file': None}


class StderrHandler(logging.StreamHandler):  # type: ignore[type-arg]
    """Writes to whatever sys.stderr is at the time of the call."""

    def __init__(self) -> None:
        logging.Handler.__init__(self)

    @property  # type: ignore[override]
    def stream(self) -> TextIO:
        return sys.stderr


def log(data: dict[str, Any]) -> None:
    message = f"{data['priority_name']} {data['type']}: {data['message']}"
    if data['info']:
        message += f" | {data['info']}"
    _logger.log(LEVELS[data['priority']], message)


def _use(handler: logging.Handler) -> None:
    for old in list(_logger.handlers):
        _logger.removeHandler(old)
        old.close()
    _logger.addHandler(handler)


def setup(file: str | Path | None = None) -> None:
    handler: logging.Handler = \
        logging.FileHandler(file, encoding='utf8') if file \
        else StderrHandler()
    handler.setFormatter(logging.Formatter('%(asctime)s %(message)s'))
    _use(handler)
    _destination.update(active=True, file=str(file) if file else None)


def reset() -> None:
    _use(logging.NullHandler())
    _destination.update(active=False, file=None)


def destination() -> dict[str, Any]:
    return dict(_destination)
