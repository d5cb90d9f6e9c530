"""
Moves on the volume submatrix graph.

A move swaps at most one selected row with an unselected one and at most
one selected column with an unselected one. Positions are relative to the
current permutations: ``row_out``/``col_out`` index the leading ``k``
entries, ``row_in``/``col_in`` index the trailing ones. ``None`` means the
side is left alone.

Scan order, shared by every consumer: row-only moves in ``(i, j)`` order,
then column-only moves in ``(s, t)`` order, then combined moves in
``(i, j, s, t)`` order. QR mode only swaps columns.
"""
from dataclasses import dataclass
from itertools import product

import numpy as np

GE = "ge"
QR = "qr"


@dataclass(frozen=True)
class Move:
    row_out: int = None
    row_in: int = None
    col_out: int = None
    col_in: int = None

    def __post_init__(self):
        if (self.row_out is None) != (self.row_in is None):
            raise ValueError("A row swap needs both row_out and row_in")
        if (self.col_out is None) != (self.col_in is None):
            raise ValueError("A column swap needs both col_out and col_in")
        if self.row_out is None and self.col_out is None:
            raise ValueError("A move must swap a row, a column, or both")

    @property
    def swaps_rows(self):
        return self.row_out is not None

    @property
    def swaps_cols(self):
        return self.col_out is not None

    def to_dict(self):
        return {
            "row_out": self.row_out,
            "row_in": self.row_in,
            "col_out": self.col_out,
            "col_in": self.col_in,
        }

    @classmethod
    def from_dict(cls, payload):
        return cls(payload.get("row_out"), payload.get("row_in"), payload.get("col_out"), payload.get("col_in"))


def _mode_parts(mode):
    name = getattr(mode, "name", mode)
    if name not in (GE, QR):
        raise ValueError(f"Unknown search mode: {name!r}")
    return name, mode.k


def neighbor_count(mode, m, n):
    """Number of neighbours of any node: ``(k(m-k)+1)(k(n-k)+1)-1`` for GE, ``k(n-k)`` for QR."""
    name, k = _mode_parts(mode)
    if name == QR:
        return k * (n - k)
    return (k * (m - k) + 1) * (k * (n - k) + 1) - 1


def neighbors(mode, m, n):
    """
    Yields every move out of a node of the volume submatrix graph, in scan order.

    :param mode: A search mode (``.name`` in ``{"ge", "qr"}`` and ``.k``).
    :param m: Number of rows of the matrix.
    :param n: Number of columns of the matrix.
    """
    name, k = _mode_parts(mode)
    col_pairs = list(product(range(k), range(n - k)))
    if name == QR:
        for s, t in col_pairs:
            yield Move(col_out=s, col_in=t)
        return
    row_pairs = list(product(range(k), range(m - k)))
    for i, j in row_pairs:
        yield Move(row_out=i, row_in=j)
    for s, t in col_pairs:
        yield Move(col_out=s, col_in=t)
    for i, j in row_pairs:
        for s, t in col_pairs:
            yield Move(i, j, s, t)


def apply_move(row_perm, col_perm, k, move):
    """Returns the permutations after ``move``; inputs are left untouched."""
    row_perm = np.array(row_perm, dtype=np.intp)
    col_perm = np.array(col_perm, dtype=np.intp)
    if move.swaps_rows:
        a, b = move.row_out, k + move.row_in
        row_perm[[a, b]] = row_perm[[b, a]]
    if move.swaps_cols:
        a, b = move.col_out, k + move.col_in
        col_perm[[a, b]] = col_perm[[b, a]]
    return row_perm, col_perm
