"""
Matrix Market ingestion and output for dense real matrices.

Dense matrices are written in ``array real general`` form with 17
significant digits so a write/read cycle is lossless. Both ``array`` and
``coordinate`` files are accepted on input; coordinate files are densified.
"""
import os

import numpy as np
import scipy.io
import scipy.sparse

from src.core.dense import as_dense
from src.core.exceptions import MatrixFormatError
from src.core.logger import get_logger

logger = get_logger(__name__)

MM_PRECISION = 17


def load_matrix(path):
    """
    Loads a Matrix Market file as a validated DenseMatrix.

    :param path: Path to a ``.mtx`` file.
    :return: Read-only float64 matrix.
    :raises FileNotFoundError: The file does not exist.
    :raises MatrixFormatError: The file is not a readable real Matrix Market matrix.
    """
    if not os.path.isfile(path):
        raise FileNotFoundError(f"Matrix file not found: {path}")
    logger.info(f"Loading matrix from {path}...")
    try:
        data = scipy.io.mmread(path)
    except (ValueError, IndexError, OSError) as exc:
        raise MatrixFormatError(f"Cannot parse Matrix Market file {path}: {exc}") from exc
    if scipy.sparse.issparse(data):
        data = data.toarray()
    if np.iscomplexobj(data):
        raise MatrixFormatError(f"Complex-valued matrix in {path} is not supported")
    matrix = as_dense(data)
    logger.info(f"Matrix loaded successfully! Shape: {matrix.shape[0]}x{matrix.shape[1]}")
    return matrix


def save_matrix(path, A, comment=""):
    """
    Writes ``A`` to ``path`` in dense ``array real general`` format.

    :param path: Destination file; parent folders are created.
    :param A: Matrix (or vector, stored as one column) to write.
    :param comment: Optional header comment.
    """
    A = np.asarray(A, dtype=np.float64)
    if A.ndim == 1:
        A = A[:, None]
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    scipy.io.mmwrite(path, A, comment=comment, field="real", precision=MM_PRECISION, symmetry="general")
    # scipy appends the extension when it is missing
    written = path if path.endswith(".mtx") else f"{path}.mtx"
    logger.debug(f"Matrix saved as: {written}")
    return written
