"""Read and write profiles, tables and reports"""

import json
import logging
import math
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Mapping, Union

import numpy as np
import pandas as pd

from smawalls.common.exceptions import InvalidArgumentException
from smawalls.common.types import PathOrStr
from smawalls.model.fields import RadialProfile, Representation

from .exceptions import MalformedConfigException, MalformedProfileException

CSV_FLOAT_FORMAT = "%.17g"


def _prepare_json_meta(meta):

    # numpy scalar -> builtin
    if isinstance(meta, np.generic):
        meta = meta.item()

    if isinstance(meta, dict):
        return {str(k): _prepare_json_meta(v) for k, v in meta.items()}
    elif isinstance(meta, (list, tuple)):
        return [_prepare_json_meta(v) for v in meta]
    elif isinstance(meta, np.ndarray):
        return [_prepare_json_meta(v) for v in meta.tolist()]
    elif isinstance(meta, Enum):
        return _prepare_json_meta(meta.value)
    elif isinstance(meta, bool):
        return meta
    elif isinstance(meta, float) and not math.isfinite(meta):
        # strict JSON has no infinities
        return str(meta)
    elif isinstance(meta, (str, float, int)) or meta is None:
        return meta
    else:
        logging.warning("Cannot serialize value of type {}".format(type(meta).__name__))
        return None


def _assure_path(p: PathOrStr) -> Path:
    if isinstance(p, str):
        return Path(p)
    else:
        return p


def save_json(path: PathOrStr, data: Mapping[str, Any]) -> None:
    """Write a JSON document with sorted keys; non-finite floats become strings"""
    path = _assure_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(_prepare_json_meta(dict(data)), f, indent=2, sort_keys=True, allow_nan=False)
        f.write("\n")


def load_json(path: PathOrStr) -> Dict[str, Any]:
    with open(_assure_path(path), "r") as f:
        return json.load(f)


def save_csv(path: PathOrStr, table: Union[pd.DataFrame, Mapping[str, Any]]) -> None:
    """Write a table with a header row and round-trip exact floats"""
    path = _assure_path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = table if isinstance(table, pd.DataFrame) else pd.DataFrame(dict(table))
    frame.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")


def read_profile(path: PathOrStr) -> RadialProfile:
    """Read a profile from a CSV file with columns theta (radians) and rho or u

    Args:
        path (PathOrStr): The file

    Returns:
        profile (RadialProfile): The profile in the representation found in the file
    """
    path = _assure_path(path)
    try:
        frame = pd.read_csv(path, float_precision="round_trip")
    except (OSError, pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise MalformedProfileException(path, str(e))

    if "theta" not in frame.columns:
        raise MalformedProfileException(path, "missing column theta")
    if "rho" in frame.columns:
        column, representation = "rho", Representation.RHO
    elif "u" in frame.columns:
        column, representation = "u", Representation.U
    else:
        raise MalformedProfileException(path, "expected a column rho or u")

    try:
        theta = frame["theta"].to_numpy(dtype=np.float64)
        values = frame[column].to_numpy(dtype=np.float64)
        return RadialProfile(theta, values, representation)
    except (ValueError, InvalidArgumentException) as e:
        raise MalformedProfileException(path, str(e))


def read_config_file(path: PathOrStr) -> Dict[str, str]:
    """Parse a flat `key = value` file

    Blank lines and `#` comments are ignored, dashes in keys are read as
    underscores. Values are returned as strings.
    """
    path = _assure_path(path)
    result = dict()
    with open(path, "r") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise MalformedConfigException(path, lineno, "expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            if not key or not value:
                raise MalformedConfigException(path, lineno, "empty key or value")
            key = key.lstrip("-").replace("-", "_")
            if key in result:
                raise MalformedConfigException(path, lineno, 'duplicate key "{}"'.format(key))
            result[key] = value
    return result
