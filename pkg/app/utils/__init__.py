"""
Output formats shared by the CLI and the HTTP routes.

States are JSON objects {"dim", "modes", "coeffs": [[re, im], ...]} with
two-mode coefficients flattened row-major (n_a*dim + n_b). Floats are
written with repr, which round-trips every double exactly.
"""

import csv
import io
import json
import math
import sys
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from app.models import AnyFockVector, FockVector, GridSpec, TruncationSpec, TwoModeFockVector


def complex_pair(z: complex) -> Optional[List[float]]:
    """[re, im], or None when either part is not finite"""
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        return None
    return [z.real, z.imag]


def parse_grid(text: str) -> GridSpec:
    """'min:max:steps' -> GridSpec"""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid must look like 'min:max:steps', got '{text}'")
    try:
        minimum, maximum, steps = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"grid must look like 'min:max:steps', got '{text}'")
    return GridSpec(minimum=minimum, maximum=maximum, steps=steps)


def state_to_payload(state: AnyFockVector) -> Dict[str, Any]:
    return {
        "dim": state.trunc.dim,
        "modes": state.modes,
        "coeffs": [[float(c.real), float(c.imag)] for c in state.flat],
    }


def state_from_payload(payload: Dict[str, Any], guard: Optional[int] = None) -> AnyFockVector:
    try:
        dim, modes, coeffs = int(payload["dim"]), int(payload["modes"]), payload["coeffs"]
    except (KeyError, TypeError) as e:
        raise ValueError(f"malformed state payload: {e}")
    if modes not in (1, 2):
        raise ValueError(f"modes must be 1 or 2, got {modes}")
    values = np.array([complex(re, im) for re, im in coeffs], dtype=complex)
    trunc = TruncationSpec(dim=dim, guard=guard)
    if modes == 1:
        return FockVector(trunc=trunc, coeffs=values)
    return TwoModeFockVector(trunc=trunc, coeffs=values)


def finite_or_none(value: Any) -> Any:
    """Replace NaN and infinities by None, recursing into lists and dicts"""
    if isinstance(value, float):
        return value if math.isfinite(value) else None
    if isinstance(value, dict):
        return {k: finite_or_none(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [finite_or_none(v) for v in value]
    return value


def dumps_json(payload: Any) -> str:
    return json.dumps(finite_or_none(payload), indent=2, allow_nan=False) + "\n"


def dumps_csv(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    return buffer.getvalue()


def read_csv(text: str) -> List[Dict[str, str]]:
    return list(csv.DictReader(io.StringIO(text)))


def write_text(text: str, path: Optional[str] = None) -> None:
    """Write to path, or to standard output when no path is given"""
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)
