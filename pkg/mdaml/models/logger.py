from typing import Any

from mdaml import config
from mdaml.storage import logger as storage


class Logger:
    @staticmethod
    def log(
            priority_: str,
            type_: str,
            message: str,
            info: str | Exception | None = None) -> None:
        log_levels = config['LOG_LEVELS']
        priority = list(log_levels)[list(log_levels.values()).index(priority_)]
        if priority <= int(config['LOG_LEVEL']):
            storage.log({
                'priority': priority,
                'priority_name': priority_,
                'type': type_,
                'message': message,
                'info': str(info) if info is not None else None})

    @staticmethod
    def setup(level: int | None = None, file: Any = None) -> None:
        if level is not None:
            config['LOG_LEVEL'] = int(level)
        storage.setup(file or config['LOG_FILE'])

    @staticmethod
    def state() -> dict[str, Any]:
        """Level and destination of this process, see restore()."""
        return {'level': int(config['LOG_LEVEL']), **storage.destination()}

    @staticmethod
    def restore(state: dict[str, Any]) -> None:
        """Apply a state() taken in another process. Worker processes start
        with a fresh import and are reused between pools, so the destination
        is only replaced where it differs."""
        config['LOG_LEVEL'] = int(state['level'])
        wanted = {'active': state['active'], 'file': state['file']}
        if storage.destination() == wanted:
            return
        if wanted['active']:
            storage.setup(wanted['file'])
        else:
            storage.reset()
