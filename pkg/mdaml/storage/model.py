import json
from pathlib import Path
from typing import Any


def write_json(path: str | Path, data: dict[str, Any]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8') as file:
        file.write(json.dumps(data, indent=2, sort_keys=True))
        file.write('\n')


def read_json(path: str | Path) -> dict[str, Any]:
    with open(path, encoding='utf-8') as file:
        return dict(json.load(file))
