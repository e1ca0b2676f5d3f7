from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Optional

from flask import Config

from mdaml import config
from mdaml.models.benchmark import EvalOptions
from mdaml.models.mdaml import MdamlParams
from mdaml.models.protocol import SplitSpec
from mdaml.resources.error import ConfigError


class RunConfig:
    """Settings of one command: defaults < instance/production.py < JSON
    run config < command line flags."""

    def __init__(self, values: Mapping[str, Any]) -> None:
        self.values = dict(values)

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    @staticmethod
    def build(
            file: Optional[str | Path] = None,
            overrides: Optional[Mapping[str, Any]] = None,
            model: bool = True) -> RunConfig:
        layered = Config(config.root_path, dict(config))
        if file:
            try:
                with open(file, encoding='utf-8') as f:
                    loaded = json.load(f)
            except OSError as e:
                raise ConfigError(f'cannot read config {file}: {e}') from e
            except json.JSONDecodeError as e:
                raise ConfigError(f'invalid JSON in {file}: {e}') from e
            if not isinstance(loaded, dict):
                raise ConfigError(f'config {file} is not a JSON object')
            if unknown := sorted(
                    key for key in loaded if key.upper() not in layered):
                raise ConfigError(f'unknown config keys: {", ".join(unknown)}')
            layered.from_mapping({k.upper(): v for k, v in loaded.items()})
        layered.update({
            key: value for key, value in (overrides or {}).items()
            if value is not None})
        run_config = RunConfig(layered)
        run_config.validate(model)
        return run_config

    def validate(self, model: bool = True) -> None:
        self.split()
        self.options()
        for key in ('K_GRID', 'LAMBDA1_GRID'):
            if self['TUNE'] and not self[key]:
                raise ConfigError(f'{key} is empty')
        if model:
            self.params()

    def _checked(self, builder: Any) -> Any:
        try:
            return builder()
        except (TypeError, ValueError) as e:
            raise ConfigError(str(e)) from e

    def params(self) -> MdamlParams:
        """Model parameters, with the first grid point as a placeholder for
        K and LAMBDA1 when they are tuned."""
        values = dict(self.values)
        if self['TUNE']:
            if values['K'] is None:
                values['K'] = self['K_GRID'][0]
            if values['LAMBDA1'] is None:
                values['LAMBDA1'] = self['LAMBDA1_GRID'][0]
        params: MdamlParams = self._checked(
            lambda: MdamlParams.from_config(values))
        return params

    def split(self) -> SplitSpec:
        spec: SplitSpec = self._checked(
            lambda: SplitSpec.from_config(self.values))
        return spec

    def options(self) -> EvalOptions:
        options: EvalOptions = self._checked(
            lambda: EvalOptions.from_config(self.values))
        return options

    def tune_grid(self) -> Optional[tuple[list[int], list[float]]]:
        if not self['TUNE']:
            return None
        return (
            [int(k) for k in self['K_GRID']],
            [float(v) for v in self['LAMBDA1_GRID']])

    @property
    def data_path(self) -> Path:
        if not self['DATA']:
            raise ConfigError('no dataset given, use --data or DATA')
        return Path(self['DATA'])

    @property
    def out_path(self) -> Path:
        return Path(self['OUTPUT_PATH'])
