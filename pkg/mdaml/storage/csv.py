from pathlib import Path
from typing import Any

import pandas as pd


def read_table(path: str | Path, header: bool = True) -> pd.DataFrame:
    return pd.read_csv(
        path,
        header=0 if header else None,
        dtype=str,
        keep_default_na=False,
        encoding='utf-8',
        skipinitialspace=True)


def write_rows(path: str | Path, rows: list[dict[str, Any]]) -> None:
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='') as file:
        file.write(pd.DataFrame(data=rows).to_csv(index=False))


def read_rows(path: str | Path) -> list[dict[str, Any]]:
    return pd.read_csv(path, keep_default_na=False).to_dict('records')
