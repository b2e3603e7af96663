import json
import logging
import os
from typing import Any, Dict, Iterable, List, Optional

import numpy as np
import pandas as pd

from functions.errors import InputError

logger = logging.getLogger(__name__)


def encode_complex(z) -> List[float]:
    z = complex(z)
    return [z.real, z.imag]


def encode_matrix(M) -> List[List[List[float]]]:
    """Row-major nested lists of [re, im] pairs"""
    M = np.atleast_2d(np.asarray(M, dtype=complex))
    return [[encode_complex(x) for x in row] for row in M]


def _decode_entry(x) -> complex:
    if isinstance(x, bool):
        raise InputError(f"invalid matrix entry {x!r}")
    if isinstance(x, (int, float)):
        return complex(x)
    if isinstance(x, list) and len(x) == 2 and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in x):
        return complex(x[0], x[1])
    raise InputError(f"invalid matrix entry {x!r}; expected a number or an [re, im] pair")


def decode_matrix(obj) -> np.ndarray:
    if not isinstance(obj, list) or not obj or not all(isinstance(row, list) for row in obj):
        raise InputError("matrix must be a non-empty list of rows")
    n = len(obj)
    if any(len(row) != n for row in obj):
        raise InputError(f"matrix must be square, got row lengths {[len(row) for row in obj]}")
    return np.array([[_decode_entry(x) for x in row] for row in obj], dtype=complex)


def load_json_argument(text: str) -> Any:
    """Inline JSON, or the contents of a file when text names one"""
    try:
        if os.path.isfile(text):
            with open(text, encoding='utf-8') as handle:
                return json.load(handle)
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise InputError(f"malformed JSON: {str(e)}")


def parse_matrix(text: str) -> np.ndarray:
    return decode_matrix(load_json_argument(text))


def parse_int_list(text: str) -> List[int]:
    try:
        return [int(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise InputError(f"expected comma separated integers, got {text!r}")


def parse_float_list(text: str) -> List[float]:
    try:
        values = [float(x) for x in text.split(',') if x.strip()]
    except ValueError:
        raise InputError(f"expected comma separated numbers, got {text!r}")
    if not values:
        raise InputError("empty list")
    return values


def _default(obj):
    if isinstance(obj, np.ndarray):
        return encode_matrix(obj) if obj.ndim == 2 else [_default(x) for x in obj]
    if isinstance(obj, (complex, np.complexfloating)):
        return encode_complex(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"cannot encode {type(obj).__name__}")


def to_json(report: Dict[str, Any]) -> str:
    return json.dumps(report, default=_default, indent=2) + '\n'


def sweep_frame(rows: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """Tabular sweep data (one row per ratio, q or sample); complex cells are split into _re/_im columns"""
    frame = pd.DataFrame(list(rows))
    for column in list(frame.columns):
        if frame[column].map(lambda v: isinstance(v, (complex, np.complexfloating))).any():
            values = frame.pop(column).astype(complex)
            frame[f"{column}_re"] = values.map(lambda v: v.real)
            frame[f"{column}_im"] = values.map(lambda v: v.imag)
    return frame


def write_report(report: Dict[str, Any], out: Optional[str] = None, fmt: str = 'json') -> str:
    """
    Serialize a report. csv writes the report's 'rows' (sweep data) only.

    Returns:
        the serialized text, also written to out when given
    """
    if fmt == 'json':
        text = to_json(report)
    elif fmt == 'csv':
        rows = report.get('rows')
        if not rows:
            raise InputError("csv output needs a command that produces sweep rows")
        text = sweep_frame(rows).to_csv(index=False, lineterminator='\n')
    else:
        raise InputError(f"unknown format {fmt!r}")
    if out:
        with open(out, 'w', encoding='utf-8', newline='') as handle:
            handle.write(text)
        logger.info(f"report written to {out}")
    return text
