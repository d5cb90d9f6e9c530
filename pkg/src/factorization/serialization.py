"""
Directory persistence for partial factorizations.

A factorization folder holds one Matrix Market file per non-empty block,
a ``metadata.txt`` of ``key: value`` lines (kind, k, permutations, block
shapes, gamma, path length) and, when a search produced it, ``report.jsonl``.
"""
import os

import numpy as np

from src.core.exceptions import MatrixFormatError
from src.core.logger import get_logger
from src.factorization.ge import PartialLU
from src.factorization.qr import PartialQR
from src.matrix_market_io import load_matrix, save_matrix

logger = get_logger(__name__)

METADATA_FILE = "metadata.txt"
REPORT_FILE = "report.jsonl"
LU_BLOCKS = ("A11", "W", "Z", "S")
QR_BLOCKS = ("Q1", "R11", "R12", "R22_gram")


def _ints(values):
    return " ".join(str(int(v)) for v in values)


def save_factorization(factorization, folder, report=None, gamma=None):
    """
    Writes a ``PartialLU`` or ``PartialQR`` to ``folder``.

    :param factorization: The factorization to persist.
    :param folder: Output folder, created if needed.
    :param report: Optional ``SearchReport`` stored as ``report.jsonl``.
    :param gamma: Search gamma recorded in the metadata (taken from ``report`` when omitted).
    :return: The folder path.
    """
    os.makedirs(folder, exist_ok=True)
    if isinstance(factorization, PartialLU):
        kind, blocks = "ge", LU_BLOCKS
        lines = [f"row_perm: {_ints(factorization.row_perm)}"]
    elif isinstance(factorization, PartialQR):
        kind, blocks = "qr", QR_BLOCKS
        lines = [f"rows: {factorization.Q1.shape[0]}"]
    else:
        raise TypeError(f"Cannot serialize {type(factorization).__name__}")

    if gamma is None and report is not None:
        gamma = report.gamma
    lines = [f"kind: {kind}", f"k: {factorization.k}"] + lines
    lines.append(f"col_perm: {_ints(factorization.col_perm)}")
    lines.append(f"log_volume: {factorization.log_volume!r}")
    if gamma is not None:
        lines.append(f"gamma: {float(gamma)!r}")
    if report is not None:
        lines.append(f"path_length: {report.path_length}")
    for name in blocks:
        block = getattr(factorization, name)
        lines.append(f"shape_{name}: {block.shape[0]} {block.shape[1]}")
        if block.size:
            save_matrix(os.path.join(folder, f"{name}.mtx"), block)

    with open(os.path.join(folder, METADATA_FILE), "w") as handle:
        handle.write("\n".join(lines) + "\n")
    if report is not None:
        report.to_jsonl(os.path.join(folder, REPORT_FILE))
    logger.info(f"Factorization saved as: {folder}")
    return folder


def read_metadata(folder):
    path = os.path.join(folder, METADATA_FILE)
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Metadata file not found: {path}")
    metadata = {}
    with open(path) as handle:
        for line in handle:
            if ":" in line:
                key, value = line.split(":", 1)
                metadata[key.strip()] = value.strip()
    return metadata


def load_factorization(folder):
    """
    Reads a factorization written by ``save_factorization``.

    :return: ``PartialLU`` or ``PartialQR``.
    :raises MatrixFormatError: The metadata is incomplete or names an unknown kind.
    """
    metadata = read_metadata(folder)
    try:
        kind = metadata["kind"]
        k = int(metadata["k"])
        col_perm = np.array(metadata["col_perm"].split(), dtype=np.intp)
        lv = float(metadata["log_volume"])
    except (KeyError, ValueError) as exc:
        raise MatrixFormatError(f"Incomplete metadata in {folder}: {exc}") from exc

    def block(name):
        shape = tuple(int(x) for x in metadata[f"shape_{name}"].split())
        path = os.path.join(folder, f"{name}.mtx")
        if 0 in shape:
            return np.zeros(shape)
        matrix = np.array(load_matrix(path))
        if matrix.shape != shape:
            raise MatrixFormatError(f"{path} has shape {matrix.shape}, metadata says {shape}")
        return matrix

    if kind == "ge":
        row_perm = np.array(metadata["row_perm"].split(), dtype=np.intp)
        return PartialLU(row_perm, col_perm, k, *(block(name) for name in LU_BLOCKS), lv)
    if kind == "qr":
        return PartialQR(col_perm, k, *(block(name) for name in QR_BLOCKS), lv)
    raise MatrixFormatError(f"Unknown factorization kind {kind!r} in {folder}")
