"""Matrix, report, and CSV file formats.

Matrices: a text format ("m,n" header, then m comma-separated rows with
round-trip-safe float repr) and a binary format (magic "PKMX", little-endian
64-bit dims, row-major float64 payload). Reports: a JSON document with a
schema_version, a config echo, per-cell records, and provenance. CSV: one
plot-ready row per cell.
"""

from __future__ import annotations

import json
import struct
from dataclasses import asdict

import numpy as np

from .errors import PursuitError

MAGIC = b"PKMX"
SCHEMA_VERSION = 1


class FileFormatError(PursuitError):
    """A file's contents do not match the declared format."""


def _format_float(v):
    # repr of a Python float is the shortest string that round-trips the
    # exact double, which is stronger than 17 significant digits.
    return repr(float(v))


def write_matrix_text(path, arr):
    """Write a matrix as the text format: 'm,n' header, then CSV rows."""
    arr = _as_matrix(arr)
    m, n = arr.shape
    lines = [f"{m},{n}"]
    for row in arr:
        lines.append(",".join(_format_float(v) for v in row))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_matrix_binary(path, arr):
    """Write a matrix as the binary format: magic, u64 dims, row-major f64."""
    arr = _as_matrix(arr)
    m, n = arr.shape
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QQ", m, n))
        fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def write_matrix(path, arr, binary=False):
    if binary:
        write_matrix_binary(path, arr)
    else:
        write_matrix_text(path, arr)


def _as_matrix(arr):
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError("expected a nonempty 2-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("matrix values must be finite")
    return arr


def read_matrix(path):
    """Read either matrix format, detected by the magic bytes."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if head == MAGIC:
            return _read_binary_body(fh, path)
    return _read_text(path)


def _read_binary_body(fh, path):
    dims = fh.read(16)
    if len(dims) != 16:
        raise FileFormatError(f"{path}: truncated binary header")
    m, n = struct.unpack("<QQ", dims)
    if m < 1 or n < 1 or m * n > 10**9:
        raise FileFormatError(f"{path}: implausible dimensions {m}x{n}")
    payload = fh.read()
    expected = 8 * m * n
    if len(payload) != expected:
        raise FileFormatError(
            f"{path}: payload is {len(payload)} bytes, expected {expected}"
        )
    arr = np.frombuffer(payload, dtype="<f8").reshape(int(m), int(n)).copy()
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{path}: non-finite values")
    return arr


def _read_text(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except UnicodeDecodeError as err:
        raise FileFormatError(f"{path}: not a text matrix file ({err})") from err
    if not lines:
        raise FileFormatError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) != 2:
        raise FileFormatError(f"{path}: header must be 'm,n'")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError as err:
        raise FileFormatError(f"{path}: header must be 'm,n'") from err
    if m < 1 or n < 1:
        raise FileFormatError(f"{path}: dimensions must be positive")
    if len(lines) - 1 != m:
        raise FileFormatError(f"{path}: expected {m} rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        parts = ln.split(",")
        if len(parts) != n:
            raise FileFormatError(f"{path}: expected {n} columns per row")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as err:
            raise FileFormatError(f"{path}: bad float ({err})") from err
    arr = np.asarray(rows, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise FileFormatError(f"{path}: non-finite values")
    return arr


def read_vector(path):
    """Read a measurement vector stored as a one-column or one-row matrix."""
    arr = read_matrix(path)
    if 1 not in arr.shape:
        raise FileFormatError(f"{path}: expected a single-row or single-column matrix")
    return arr.ravel()


def report_to_dict(report):
    """Serialize an ExperimentReport to the JSON document structure.

    The config echo covers the result-defining fields only; threads and
    timing collection never change the numbers and are omitted.
    """
    cfg = report.config
    return {
        "schema_version": SCHEMA_VERSION,
        "config": {
            "m": cfg.m,
            "n_ratios": list(cfg.n_ratios),
            "sparsity_range": list(cfg.sparsity_range),
            "trials": cfg.trials,
            "algorithms": list(cfg.algorithms),
            "noise_eps": cfg.noise_eps,
            "base_seed": cfg.base_seed,
            "value_distribution": cfg.value_distribution,
        },
        "cells": [asdict(c) for c in report.cells],
        "provenance": dict(report.provenance),
    }


def write_report(path, report):
    doc = report if isinstance(report, dict) else report_to_dict(report)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def read_report(path):
    """Read and validate a report JSON document."""
    with open(path, "r", encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as err:
            raise FileFormatError(f"{path}: invalid JSON ({err})") from err
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise FileFormatError(f"{path}: unsupported schema_version")
    for key in ("config", "cells", "provenance"):
        if key not in doc:
            raise FileFormatError(f"{path}: missing {key}")
    return doc


def write_frequency_csv(path, report):
    """Write plot-ready CSV: algorithm,m,n,s,frequency, one sorted row per cell."""
    doc = report if isinstance(report, dict) else report_to_dict(report)
    rows = sorted(
        (c["algorithm"], c["m"], c["n"], c["s"], c["frequency"])
        for c in doc["cells"]
    )
    lines = ["algorithm,m,n,s,frequency"]
    lines += [f"{a},{m},{n},{s},{_format_float(f)}" for a, m, n, s, f in rows]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def recovery_to_dict(result, algorithm, m, n):
    """Serialize a RecoveryResult for CLI output."""
    return {
        "algorithm": algorithm,
        "m": int(m),
        "n": int(n),
        "support": [int(i) for i in result.support],
        "estimate": {
            "indices": [int(i) for i in result.estimate.support],
            "values": [float(v) for v in result.estimate.values],
        },
        "iterations_run": int(result.iterations_run),
        "selection_history": [[int(i) for i in sel] for sel in result.selection_history],
        "residual_history": [float(v) for v in result.residual_history],
        "dropped": [[int(k), int(i)] for k, i in result.dropped],
    }
