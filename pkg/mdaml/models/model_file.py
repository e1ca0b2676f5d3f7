from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Any, Optional

from mdaml import config
from mdaml.models.anchor import AnchorModel
from mdaml.models.dataset import Normalizer
from mdaml.models.mdaml import FitReport
from mdaml.models.spd import SPDMatrix
from mdaml.resources.error import DataError, MdamlError
from mdaml.storage import model as storage


@dataclass
class TrainedModel:
    metric: SPDMatrix
    anchors: AnchorModel
    params: dict[str, Any]
    normalizer: Optional[Normalizer] = None
    classes: Optional[list[str]] = None
    report: Optional[FitReport] = None

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        return {
            'schema_version': config['MODEL_SCHEMA_VERSION'],
            'version': config['VERSION'],
            'dim': self.metric.dim,
            'metric': self.metric.data.tolist(),
            'centers': self.anchors.centers.tolist(),
            'weights': self.anchors.weights.tolist(),
            'params': self.params,
            'normalizer':
                self.normalizer.to_dict() if self.normalizer else None,
            'classes': self.classes,
            'report':
                self.report.to_dict(include_timing) if self.report else None}

    def save(self, path: str | Path, include_timing: bool = False) -> None:
        storage.write_json(path, self.to_dict(include_timing))

    @staticmethod
    def from_dict(data: dict[str, Any]) -> TrainedModel:
        if data.get('schema_version') != config['MODEL_SCHEMA_VERSION']:
            raise DataError(
                f"unsupported model schema {data.get('schema_version')}")
        try:
            return TrainedModel(
                SPDMatrix(data['metric']),
                AnchorModel(data['centers'], data['weights']),
                data['params'],
                Normalizer.from_dict(data['normalizer'])
                if data.get('normalizer') else None,
                data.get('classes'))
        except KeyError as e:
            raise DataError(f'model file misses {e}') from e
        except MdamlError as e:
            raise DataError(f'invalid model file: {e}') from e

    @staticmethod
    def load(path: str | Path) -> TrainedModel:
        try:
            return TrainedModel.from_dict(storage.read_json(path))
        except FileNotFoundError as e:
            raise DataError(f'model file not found: {path}') from e
        except OSError as e:
            raise DataError(f'cannot read {path}: {e.strerror}') from e
        except ValueError as e:
            raise DataError(f'model file is not valid JSON: {e}') from e
