"""
matrix_market.py
Reading and writing `%%MatrixMarket matrix coordinate real symmetric|general`
and `array real general` files. Symmetric coordinate files are mirrored on read.
"""

from pathlib import Path
from typing import Union

import numpy as np
import scipy.io
import scipy.sparse as sp

from .helpers import TraceEstimationError
from .linop import DenseOperator, ImplicitOperator, SparseOperator
from .logger import logger

SUPPORTED = {
    ("coordinate", "real", "general"),
    ("coordinate", "real", "symmetric"),
    ("array", "real", "general"),
    ("array", "real", "symmetric"),
}

PathLike = Union[str, Path]


def read_matrix(path: PathLike) -> ImplicitOperator:
    """
    Load a square real matrix. Coordinate files give a SparseOperator, array
    files a DenseOperator.
    """
    path = Path(path)
    try:
        rows, cols, entries, fmt, field, symmetry = scipy.io.mminfo(str(path))
    except (OSError, ValueError) as e:
        raise MatrixFormatError(f"Cannot read Matrix Market header of {path}: {e}") from e
    if (fmt, field, symmetry) not in SUPPORTED:
        raise MatrixFormatError(f"Unsupported Matrix Market type '{fmt} {field} {symmetry}' in {path}")
    if rows != cols:
        raise MatrixFormatError(f"Matrix in {path} is {rows} x {cols}, but only square matrices are supported")
    try:
        data = scipy.io.mmread(str(path))
    except ValueError as e:
        raise MatrixFormatError(f"Malformed Matrix Market body in {path}: {e}") from e
    logger.debug(f"Read {fmt} {symmetry} {rows}x{cols} matrix with {entries} stored entries from {path}")
    if sp.issparse(data):
        return SparseOperator(data)
    return DenseOperator(np.asarray(data, dtype=np.float64))


def write_matrix(path: PathLike, op: ImplicitOperator, fmt: str = "coordinate") -> Path:
    """
    Write an operator, materialized if needed. Symmetric operators in coordinate
    format are written with the symmetric qualifier (lower triangle only); array
    files are always general.
    """
    if fmt not in ("coordinate", "array"):
        raise ValueError(f"Matrix Market format must be 'coordinate' or 'array', but received: {fmt}")
    path = Path(path)
    if path.suffix != ".mtx":
        path = path.with_name(path.name + ".mtx")
    if isinstance(op, SparseOperator):
        data = op.matrix
    else:
        data = op.to_dense()
    symmetry = "symmetric" if op.symmetric and fmt == "coordinate" else "general"
    if fmt == "coordinate":
        data = sp.coo_matrix(data)
        if symmetry == "symmetric":
            data = sp.tril(data, format="coo")
    else:
        data = data.toarray() if sp.issparse(data) else data
    scipy.io.mmwrite(str(path), data, field="real", symmetry=symmetry, precision=17)
    logger.debug(f"Wrote {fmt} {symmetry} {op.dim}x{op.dim} matrix to {path}")
    return path


class MatrixFormatError(TraceEstimationError, ValueError):
    """Raised for unreadable or unsupported Matrix Market files"""
    pass
