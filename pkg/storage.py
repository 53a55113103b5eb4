"""
Storage module for the lattice coset-code toolkit
Handles all file input and output: lattice, rotation and code-descriptor
files, CSV and JSON reports, metadata sidecars and run configuration files.
"""

import csv
import io
import json
import logging
import os
import sys
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from services.coset_service import CosetCode, NestedLatticePair, build_coset_code, make_nested_pair, rotate_pair
from services.errors import InputFileError, LatticeToolError
from services.ideal_service import (
    QuadraticField, QuadraticInteger, ideal_pair, normalize_pair_to_unit_base, principal_ideal_lattice,
)
from services.lattice_service import Lattice

logger = logging.getLogger(__name__)

# Storage configuration
TOOL_VERSION = "1.0.0"
SIDECAR_SUFFIX = ".meta.json"
STDOUT = "-"


def parse_number(token: str):
    """Integer, fraction a/b or decimal; integer-valued fractions become ints."""
    try:
        if "/" in token:
            value = Fraction(token)
            return int(value) if value.denominator == 1 else value
        if any(c in token for c in ".eE") and not token.lstrip("+-").isdigit():
            return float(token)
        return int(token)
    except (ValueError, ZeroDivisionError):
        raise InputFileError(f"cannot parse number {token!r}") from None


def read_matrix_file(path: str) -> Tuple[bool, List[List]]:
    """
    Read a square matrix file.

    Format: optional 'rotation' line, then n, then n rows of n numbers.
    '#' starts a comment. Returns (is_rotation, rows).
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = [line.split("#", 1)[0].strip() for line in handle]
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc.strerror}") from None
    lines = [line for line in lines if line]
    is_rotation = bool(lines) and lines[0].lower() == "rotation"
    if is_rotation:
        lines = lines[1:]
    if not lines:
        raise InputFileError(f"{path}: empty matrix file")
    try:
        n = int(lines[0])
    except ValueError:
        raise InputFileError(f"{path}: first line must be the dimension, got {lines[0]!r}") from None
    rows = [[parse_number(tok) for tok in line.split()] for line in lines[1:]]
    if n < 1 or len(rows) != n or any(len(row) != n for row in rows):
        raise InputFileError(f"{path}: expected {n} rows of {n} entries")
    return is_rotation, rows


def read_lattice(path: str) -> Lattice:
    is_rotation, rows = read_matrix_file(path)
    if is_rotation:
        raise InputFileError(f"{path} holds a rotation, not a lattice basis")
    return Lattice.from_rows(rows)


def read_rotation(path: str) -> np.ndarray:
    _, rows = read_matrix_file(path)
    return np.array([[float(v) for v in row] for row in rows])


def write_lattice(lattice: Lattice, path: str) -> None:
    """Write a basis in the lattice file format."""
    lines = [str(lattice.n)] + [" ".join(repr(v) if isinstance(v, float) else str(v) for v in row)
                                for row in lattice.rows()]
    _write_text("\n".join(lines) + "\n", path)


# ---------------------------------------------------------------------------
# code descriptors
# ---------------------------------------------------------------------------

def load_descriptor(path: str) -> Dict:
    try:
        with open(path, encoding="utf-8") as handle:
            descriptor = json.load(handle)
    except OSError as exc:
        raise InputFileError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputFileError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(descriptor, dict) or "m_pam" not in descriptor:
        raise InputFileError(f"{path}: a code descriptor needs an m_pam entry")
    return descriptor


def pair_from_descriptor(descriptor: Dict, base_dir: str = ".") -> NestedLatticePair:
    """
    Nested pair described by either lattice files (lattice_b, lattice_e) or a
    principal ideal (field_d, generator = [p, q] for (p + q·sqrt D)/2).
    """
    def resolve(name):
        return os.path.join(base_dir, descriptor[name])

    if "field_d" in descriptor:
        try:
            p, q = (int(v) for v in descriptor["generator"])
        except (KeyError, TypeError, ValueError):
            raise InputFileError("an ideal code needs generator = [p, q]") from None
        field = QuadraticField(int(descriptor["field_d"]))
        pair = ideal_pair(principal_ideal_lattice(field, QuadraticInteger(p, q, field.d)))
    elif "lattice_b" in descriptor and "lattice_e" in descriptor:
        pair = make_nested_pair(read_lattice(resolve("lattice_b")), read_lattice(resolve("lattice_e")))
    else:
        raise InputFileError("a code descriptor needs lattice_b and lattice_e, or field_d and generator")

    if descriptor.get("normalize") == "unit_base":
        pair = normalize_pair_to_unit_base(pair)
    elif descriptor.get("normalize"):
        raise InputFileError(f"unknown normalization {descriptor['normalize']!r}")
    if descriptor.get("rotation"):
        pair = rotate_pair(pair, read_rotation(resolve("rotation")))
    return pair


def load_code(path: str) -> Tuple[CosetCode, Dict]:
    """Build the coset code of a descriptor file; returns (code, descriptor)."""
    descriptor = load_descriptor(path)
    pair = pair_from_descriptor(descriptor, os.path.dirname(os.path.abspath(path)))
    code = build_coset_code(pair, int(descriptor["m_pam"]))
    return code, descriptor


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

def _plain(value):
    if isinstance(value, (np.floating,)):
        return float(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, Fraction):
        return int(value) if value.denominator == 1 else float(value)
    if hasattr(value, "value") and hasattr(value, "name"):
        return value.value
    return value


def _write_text(text: str, out: str) -> None:
    if out == STDOUT:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as exc:
        raise InputFileError(f"cannot write {out}: {exc.strerror}") from None
    logger.info("wrote %s", out)


def format_csv(rows: Iterable[Dict], columns: Sequence[str]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_plain(row[c]) for c in columns])
    return buffer.getvalue()


def write_csv(rows: Iterable[Dict], columns: Sequence[str], out: str) -> None:
    """CSV with a fixed column order; floats are written with repr."""
    _write_text(format_csv(rows, columns), out)


def write_json(payload, out: str) -> None:
    _write_text(json.dumps(payload, indent=2, sort_keys=True, default=_plain) + "\n", out)


def write_report(rows: List[Dict], columns: Sequence[str], out: str, fmt: str) -> None:
    if fmt == "json":
        write_json([{c: _plain(row[c]) for c in columns} for row in rows], out)
    else:
        write_csv(rows, columns, out)


def sidecar_path(out: str) -> Optional[str]:
    return None if out == STDOUT else out + SIDECAR_SUFFIX


def write_sidecar(out: str, command: str, params: Dict, global_params: Optional[Dict] = None,
                  metadata: Optional[Dict] = None, config: Optional[Dict] = None) -> Optional[str]:
    """
    Write X.meta.json next to the output X. The sidecar is itself a valid
    config file, so the run can be repeated from it.
    """
    path = sidecar_path(out)
    if path is None:
        return None
    payload = {
        "command": command,
        "params": {k: _plain(v) for k, v in params.items()},
        "global": {k: _plain(v) for k, v in (global_params or {}).items()},
        "config": config or {},
        "tool_version": TOOL_VERSION,
        "metadata": metadata or {},
    }
    write_json(payload, path)
    return path


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

def load_config(path: str) -> Dict[str, Dict]:
    """
    Read a run configuration as a click default_map.

    Accepts {"<command>": {option: value}} or a metadata sidecar
    {"command": ..., "params": {...}}.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            data = json.load(handle)
    except OSError as exc:
        raise InputFileError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputFileError(f"{path}: invalid JSON ({exc.msg})") from None
    if not isinstance(data, dict):
        raise InputFileError(f"{path}: config must be a JSON object")
    if "command" in data and "params" in data:
        defaults = dict(data.get("global", {}))
        defaults[data["command"]] = dict(data["params"])
        return defaults
    return data


def safe_load_code(path: str) -> Tuple[CosetCode, Dict]:
    """load_code that reports which descriptor failed."""
    try:
        return load_code(path)
    except LatticeToolError as exc:
        exc.args = (f"{path}: {exc}",)
        raise
