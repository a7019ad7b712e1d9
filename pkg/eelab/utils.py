"""
Hjälpfunktioner för eelab.

Denna modul innehåller loggning, serialisering av resultatfiler och
seedning av slumptalsgeneratorer som används av alla andra moduler.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np
import pandas as pd

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

CSV_SCHEMA_VERSION = 1


def setup_logger(name: str, level: int = logging.INFO) -> logging.Logger:
    """
    Skapa och konfigurera en logger.

    Anropas flera gånger med samma namn läggs ingen ny handler till.

    Args:
        name: Namnet på loggern
        level: Loggnivå

    Returns:
        En konfigurerad logger
    """
    logger = logging.getLogger(name)
    logger.setLevel(level)

    if not any(getattr(h, "_eelab", False) for h in logger.handlers):
        # Skapa en handler som skriver till stderr
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter(LOG_FORMAT))
        handler._eelab = True
        logger.addHandler(handler)

    for handler in logger.handlers:
        handler.setLevel(level)

    return logger


class NumpyEncoder(json.JSONEncoder):
    """JSON-encoder som förstår numpy-skalärer och -arrayer."""

    def default(self, obj):
        if isinstance(obj, np.integer):
            return int(obj)
        if isinstance(obj, np.floating):
            return float(obj)
        if isinstance(obj, np.bool_):
            return bool(obj)
        if isinstance(obj, np.ndarray):
            return obj.tolist()
        if isinstance(obj, Path):
            return str(obj)
        return super().default(obj)


def save_to_json(data: Any, file_path: Union[str, Path], indent: int = 2) -> None:
    """
    Spara data till en JSON-fil.

    Args:
        data: Data att spara
        file_path: Sökväg till filen
        indent: Indenteringsnivå för JSON
    """
    # Skapa katalogen om den inte finns
    Path(file_path).parent.mkdir(parents=True, exist_ok=True)

    with open(file_path, 'w', encoding='utf-8') as f:
        json.dump(data, f, ensure_ascii=False, indent=indent, sort_keys=True, cls=NumpyEncoder)
        f.write("\n")


def load_json_file(file_path: Union[str, Path]) -> Any:
    """Ladda data från en JSON-fil."""
    with open(file_path, 'r', encoding='utf-8') as f:
        return json.load(f)


def save_rows_to_csv(rows: List[Dict[str, Any]], file_path: Union[str, Path],
                     columns: List[str]) -> None:
    """
    Spara resultatrader som CSV med en schemarad överst.

    Kolumnordningen är fast och flyttal skrivs med full precision så att
    samma körning ger byte-identiska filer.

    Args:
        rows: Lista med rader
        file_path: Sökväg till filen
        columns: Kolumnordning
    """
    Path(file_path).parent.mkdir(parents=True, exist_ok=True)

    df = pd.DataFrame(rows, columns=columns)
    with open(file_path, 'w', encoding='utf-8', newline='') as f:
        f.write(f"# schema={CSV_SCHEMA_VERSION}\n")
        df.to_csv(f, index=False, float_format="%.17g", lineterminator="\n")


def load_rows_from_csv(file_path: Union[str, Path]) -> pd.DataFrame:
    """
    Läs en resultatfil skriven av save_rows_to_csv.

    Raises:
        ValueError: Om schemaraden saknas eller har fel version
    """
    with open(file_path, 'r', encoding='utf-8') as f:
        header = f.readline().strip()
    if header != f"# schema={CSV_SCHEMA_VERSION}":
        raise ValueError(f"Okänd schemarad i {file_path}: {header!r}")
    return pd.read_csv(file_path, comment='#')


def make_rng(seed: int, index: int = 0) -> np.random.Generator:
    """
    Skapa en deterministisk slumptalsgenerator för sampel nummer index.

    Args:
        seed: Körningens grundseed
        index: Sampelindex

    Returns:
        En numpy Generator
    """
    return np.random.default_rng([seed, index])
