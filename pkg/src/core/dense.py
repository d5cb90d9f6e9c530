"""
Dense matrix carrier and submatrix selections.

A DenseMatrix is a two-dimensional, read-only, C-ordered (row-major)
``numpy.ndarray`` of 64-bit floats with finite entries. ``as_dense`` is the
only place that builds one; generators and file ingestion go through it.
Indices are 0-based throughout.
"""
from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from src.core.exceptions import MatrixFormatError, SelectionError

DenseMatrix = npt.NDArray[np.float64]


def as_dense(data, copy=False):
    """
    Validates ``data`` and returns it as a read-only float64 row-major matrix.

    :param data: Anything ``numpy.asarray`` accepts (nested lists, arrays).
    :param copy: Force a copy even when ``data`` is already a suitable array.
    :return: The validated matrix.
    :raises MatrixFormatError: Not two-dimensional, empty, or non-finite.
    """
    try:
        if copy:
            matrix = np.array(data, dtype=np.float64, order="C")
        else:
            matrix = np.asarray(data, dtype=np.float64, order="C")
    except (TypeError, ValueError) as exc:
        raise MatrixFormatError(f"Cannot interpret input as a real matrix: {exc}") from exc
    if matrix.ndim != 2:
        raise MatrixFormatError(f"Expected a two-dimensional matrix, got ndim={matrix.ndim}")
    if matrix.shape[0] < 1 or matrix.shape[1] < 1:
        raise MatrixFormatError(f"Matrix must have at least one row and one column, got {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise MatrixFormatError("Matrix contains NaN or infinite entries")
    if matrix is data and matrix.flags.writeable:
        matrix = matrix.copy()
    matrix.setflags(write=False)
    return matrix


def max_norm(A):
    return float(np.max(np.abs(A))) if A.size else 0.0


@dataclass(frozen=True)
class Selection:
    """
    Ordered row and column index lists identifying a submatrix ``A(rows, cols)``.

    Column-subset (QR) selections carry every row, in order.
    """

    row_idx: tuple
    col_idx: tuple

    def __post_init__(self):
        object.__setattr__(self, "row_idx", tuple(int(i) for i in self.row_idx))
        object.__setattr__(self, "col_idx", tuple(int(j) for j in self.col_idx))

    @classmethod
    def leading(cls, k, m=None):
        """Leading ``k`` rows and columns; with ``m`` given, all ``m`` rows and the leading ``k`` columns."""
        rows = range(k) if m is None else range(m)
        return cls(tuple(rows), tuple(range(k)))

    @classmethod
    def columns(cls, m, cols):
        return cls(tuple(range(m)), tuple(cols))

    @property
    def shape(self):
        return len(self.row_idx), len(self.col_idx)

    def is_column_subset(self, m):
        return self.row_idx == tuple(range(m))

    def validate(self, m, n):
        """
        Checks that indices are distinct and inside an ``m`` x ``n`` matrix.

        :raises SelectionError: On an empty list, a repeat, or an out-of-range index.
        """
        for name, idx, bound in (("row", self.row_idx, m), ("column", self.col_idx, n)):
            if not idx:
                raise SelectionError(f"Selection has no {name} indices")
            if len(set(idx)) != len(idx):
                raise SelectionError(f"Selection repeats a {name} index: {list(idx)}")
            bad = [i for i in idx if i < 0 or i >= bound]
            if bad:
                raise SelectionError(f"{name.capitalize()} index {bad[0]} out of range [0, {bound})")
        return self

    def to_dict(self):
        return {"rows": list(self.row_idx), "cols": list(self.col_idx)}

    @classmethod
    def from_dict(cls, payload):
        """
        Reads ``{"rows": [...], "cols": [...]}``.

        :raises SelectionError: When the payload is not an object or a key is missing.
        """
        if not isinstance(payload, dict):
            raise SelectionError(f"Selection must be a JSON object, got {type(payload).__name__}")
        for key in ("rows", "cols"):
            if key not in payload:
                raise SelectionError(f"Selection is missing the \"{key}\" key")
        return cls(tuple(payload["rows"]), tuple(payload["cols"]))


def extract(A, sel):
    """
    Returns the submatrix ``A(sel.row_idx, sel.col_idx)``.

    :raises SelectionError: Out-of-range or repeated index.
    """
    sel.validate(*A.shape)
    return A[np.ix_(sel.row_idx, sel.col_idx)]


def complete_permutation(leading, size):
    """Extends ``leading`` indices to a full permutation of ``range(size)``, keeping the rest in order."""
    chosen = list(leading)
    taken = set(chosen)
    return np.array(chosen + [i for i in range(size) if i not in taken], dtype=np.intp)
