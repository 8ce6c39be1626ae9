"""
CSV tables: comma-separated, header row, '#' comment lines, UTF-8, LF
"""

import io
import logging
from pathlib import Path
from typing import Mapping, Optional, Union

import numpy as np
import pandas as pd

from ..exceptions import TableParseError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"


def write_table(frame: pd.DataFrame, path: Union[str, Path],
                header: Optional[Mapping[str, object]] = None) -> Path:
    """Write ``frame`` with ``# key=value`` comment lines ahead of the header row"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for key, value in (header or {}).items():
            fh.write(f"# {key}={value}\n")
        frame.to_csv(fh, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
    logger.debug(f"wrote {len(frame)} rows to {path}")
    return path


def read_header(path: Union[str, Path]) -> dict:
    """``# key=value`` comment lines of a table"""
    meta = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if not line.startswith("#"):
                continue
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                meta[key.strip()] = value.strip()
    return meta


def read_table(path: Union[str, Path]) -> pd.DataFrame:
    """Read a table written by :func:`write_table` (or any CSV with '#' comments)"""
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    body = [(n, line) for n, line in enumerate(lines, start=1) if line.strip() and not line.startswith("#")]
    if not body:
        raise TableParseError("no header row", len(lines))
    header_line, header = body[0]
    width = len(header.split(","))
    for n, line in body[1:]:
        if len(line.split(",")) != width:
            raise TableParseError(f"expected {width} fields, got {len(line.split(','))}", n)
    try:
        return pd.read_csv(io.StringIO("\n".join(line for _, line in body)))
    except (pd.errors.ParserError, ValueError) as e:
        raise TableParseError(str(e), header_line)


def read_pairs_table(path: Union[str, Path]) -> pd.DataFrame:
    """
    Two-column numeric table such as (alpha, value) or (K, nu). Columns
    are renamed ``x`` and ``y`` and every cell must parse as a float.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    rows, header_seen = [], False
    for n, line in enumerate(lines, start=1):
        if not line.strip() or line.startswith("#"):
            continue
        fields = [f.strip() for f in line.split(",")]
        if len(fields) != 2:
            raise TableParseError(f"expected 2 fields, got {len(fields)}", n)
        try:
            rows.append((float(fields[0]), float(fields[1])))
        except ValueError:
            if header_seen or rows:
                raise TableParseError(f"non-numeric value {line!r}", n)
            header_seen = True
    if not rows:
        raise TableParseError("table has no data rows", len(lines))
    frame = pd.DataFrame(rows, columns=["x", "y"])
    if not np.all(np.isfinite(frame.to_numpy())):
        logger.warning(f"{path}: table contains non-finite values")
    return frame
