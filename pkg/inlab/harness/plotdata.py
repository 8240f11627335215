"""CSV files behind the learning-curve and sweep plots.

Every file starts with one comment line naming the schema version and the
table kind, followed by a regular CSV header:

    # inlab-plotdata v1 kind=training_log
    iteration,env_steps,...
"""
from __future__ import annotations

import logging
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd

from ..shared.errors import ConfigurationError

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_PREFIX = "# inlab-plotdata"


def write_table(frame: pd.DataFrame, path: Path | str, kind: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        handle.write(f"{_PREFIX} v{SCHEMA_VERSION} kind={kind}\n")
        frame.to_csv(handle, index=False)
    logger.info(f"Wrote {len(frame)} rows of {kind} to {path}")
    return path


def emit_plotdata(log, path: Path | str, kind: str = "training_log") -> Path:
    """Write a per-iteration log (anything with .frame()); an empty log yields a header-only file."""
    return write_table(log.frame(), path, kind)


def read_header(path: Path | str) -> Tuple[int, str]:
    with Path(path).open() as handle:
        first = handle.readline().strip()
    if not first.startswith(_PREFIX):
        raise ConfigurationError(f"{path} is not an inlab plot-data file")
    try:
        _, _, version, kind = first.split(" ", 3)
        return int(version.lstrip("v")), kind.split("=", 1)[1]
    except (ValueError, IndexError) as e:
        raise ConfigurationError(f"malformed plot-data header in {path}: {first}") from e


def read_table(path: Path | str, kind: Optional[str] = None) -> pd.DataFrame:
    version, found = read_header(path)
    if version != SCHEMA_VERSION:
        raise ConfigurationError(f"{path} has plot-data schema v{version}, expected v{SCHEMA_VERSION}")
    if kind is not None and found != kind:
        raise ConfigurationError(f"{path} holds '{found}', expected '{kind}'")
    return pd.read_csv(path, comment="#")


def write_groups(curves: Dict[str, List[pd.DataFrame]], summary: pd.DataFrame, out_dir: Path | str) -> List[Path]:
    """One curve file per group (per-seed frames stacked) plus summary.csv."""
    out_dir = Path(out_dir)
    written = []
    for label, frames in curves.items():
        stacked = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
        written.append(write_table(stacked, out_dir / f"curves_{label}.csv", "curves"))
    written.append(write_table(summary, out_dir / "summary.csv", "summary"))
    return written
