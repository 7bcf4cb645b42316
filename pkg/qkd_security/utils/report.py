"""
Report writers; every file carries the run header (tool, version, seed, config)
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Union

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)


def _to_jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_to_jsonable(v) for v in value]
    if isinstance(value, pd.DataFrame):
        return value.to_dict(orient="records")
    if isinstance(value, np.ndarray):
        return _to_jsonable(value.tolist())
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating,)):
        value = float(value)
    if isinstance(value, float) and not np.isfinite(value):
        return None if np.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def write_json(path: Union[str, Path], header: Dict[str, Any], payload: Dict[str, Any]) -> Path:
    """
    Write header and payload as one JSON document

    Args:
        path (str | Path): Output file, parent directories are created
        header (Dict): Tool name, version, seed and config echo
        payload (Dict): Command results

    Returns:
        Path: The written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    document = {**_to_jsonable(header), "results": _to_jsonable(payload)}
    path.write_text(json.dumps(document, indent=2, sort_keys=True), encoding="utf-8")
    logger.info(f"✓ Wrote {path}")
    return path


def write_csv(path: Union[str, Path], header: Dict[str, Any], frame: pd.DataFrame, index: bool = False) -> Path:
    """CSV with the header as leading '#' lines; read back with pd.read_csv(path, comment='#')"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [f"# {json.dumps(_to_jsonable(header), sort_keys=True)}"]
    with path.open("w", encoding="utf-8", newline="") as handle:
        handle.write("\n".join(lines) + "\n")
        frame.to_csv(handle, index=index)
    logger.info(f"✓ Wrote {path} ({len(frame)} rows)")
    return path
