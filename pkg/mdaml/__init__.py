from pathlib import Path

from flask import Config

config = Config(str(Path(__file__).parent.parent / 'instance'))
config.from_object('config.default')
config.from_pyfile('production.py', silent=True)

# pylint: disable=cyclic-import, wrong-import-position
from mdaml.models.logger import Logger

logger = Logger()
