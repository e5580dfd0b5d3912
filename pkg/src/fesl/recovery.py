"""Least-squares recovery of the vanished feature space.

During the overlap the estimator accumulates the new-space Gram matrix and
the new-to-old cross moments; afterwards it solves a ridge-regularized
normal system for the linear map that reconstructs old-space instances
from new-space ones. The plain normal equations are singular whenever the
overlap is shorter than the new dimensionality, which is the common case,
so a small ridge term (default 1e-3) keeps the solve well posed; it reduces
to the unregularized solution on full-rank data as the ridge goes to zero.
"""

from __future__ import annotations

from typing import Optional

import numpy as np
import scipy.linalg

from .core import InvalidInputError, SingularSystemError, StateError, as_vector


class MapEstimator:
    """Accumulates overlap samples and solves for the recovery map.

    Parameters
    ----------
    d_new, d_old : int
        Dimensions of the new and old feature spaces.
    ridge : float
        Nonnegative Tikhonov term added to the Gram matrix before solving.
    """

    def __init__(self, d_new: int, d_old: int, ridge: float = 1e-3):
        if d_new < 1 or d_old < 1:
            raise InvalidInputError("dimensions must be positive")
        if ridge < 0:
            raise InvalidInputError(f"ridge must be nonnegative, got {ridge}")
        self.d_new = d_new
        self.d_old = d_old
        self.ridge = float(ridge)
        self.gram = np.zeros((d_new, d_new))        # sum of x_new x_new^T
        self.cross = np.zeros((d_new, d_old))       # sum of x_new x_old^T
        self.samples_seen = 0
        self.matrix: Optional[np.ndarray] = None    # (d_new, d_old) once solved

    @property
    def solved(self) -> bool:
        return self.matrix is not None

    def accumulate(self, x_new, x_old) -> "MapEstimator":
        """Add one overlap pair to the accumulators."""
        if self.solved:
            raise StateError("cannot accumulate after solve")
        x_new = as_vector(x_new, "x_new")
        x_old = as_vector(x_old, "x_old")
        if x_new.shape[0] != self.d_new or x_old.shape[0] != self.d_old:
            raise InvalidInputError(
                f"expected dims ({self.d_new}, {self.d_old}), "
                f"got ({x_new.shape[0]}, {x_old.shape[0]})"
            )
        self.gram += np.outer(x_new, x_new)
        self.cross += np.outer(x_new, x_old)
        self.samples_seen += 1
        return self

    def accumulate_batch(self, new_rows: np.ndarray, old_rows: np.ndarray) -> "MapEstimator":
        """Add several overlap pairs at once (order-independent sums)."""
        if self.solved:
            raise StateError("cannot accumulate after solve")
        new_rows = np.asarray(new_rows, dtype=np.float64)
        old_rows = np.asarray(old_rows, dtype=np.float64)
        if new_rows.ndim != 2 or old_rows.ndim != 2 or len(new_rows) != len(old_rows):
            raise InvalidInputError("need two equal-length 2-D row batches")
        if new_rows.shape[1] != self.d_new or old_rows.shape[1] != self.d_old:
            raise InvalidInputError(
                f"expected row dims ({self.d_new}, {self.d_old}), "
                f"got ({new_rows.shape[1]}, {old_rows.shape[1]})"
            )
        if not (np.all(np.isfinite(new_rows)) and np.all(np.isfinite(old_rows))):
            raise InvalidInputError("rows contain non-finite entries")
        self.gram += new_rows.T @ new_rows
        self.cross += new_rows.T @ old_rows
        self.samples_seen += len(new_rows)
        return self

    def solve(self) -> "MapEstimator":
        """Solve the (ridge-regularized) normal equations for the map.

        Uses a symmetric positive-definite factorization, never an explicit
        inverse. With a zero ridge a rank-deficient Gram matrix raises
        :class:`SingularSystemError`.
        """
        if self.samples_seen < 1:
            raise StateError("solve requires at least one accumulated sample")
        lhs = self.gram + self.ridge * np.eye(self.d_new)
        try:
            matrix = scipy.linalg.solve(lhs, self.cross, assume_a="pos")
        except np.linalg.LinAlgError as exc:
            raise SingularSystemError(
                "normal system is singular; set ridge > 0 to regularize"
            ) from exc
        if not np.all(np.isfinite(matrix)):
            raise SingularSystemError(
                "normal system is numerically singular; set ridge > 0 to regularize"
            )
        self.matrix = matrix
        return self

    def recover(self, x_new) -> np.ndarray:
        """Map a new-space instance to its old-space reconstruction."""
        if not self.solved:
            raise StateError("recover requires a solved estimator")
        x_new = as_vector(x_new, "x_new")
        if x_new.shape[0] != self.d_new:
            raise InvalidInputError(
                f"expected dim {self.d_new}, got {x_new.shape[0]}"
            )
        return self.matrix.T @ x_new

    def recover_batch(self, new_rows: np.ndarray) -> np.ndarray:
        """Row-wise :meth:`recover` for a 2-D batch."""
        if not self.solved:
            raise StateError("recover requires a solved estimator")
        new_rows = np.asarray(new_rows, dtype=np.float64)
        return np.ascontiguousarray(new_rows @ self.matrix)

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, ridge: float = 1e-3) -> "MapEstimator":
        """Build an already-solved estimator from a stored map matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        if matrix.ndim != 2:
            raise InvalidInputError("map matrix must be 2-D")
        est = cls(matrix.shape[0], matrix.shape[1], ridge=ridge)
        est.matrix = matrix
        return est

    def save_map(self, path) -> None:
        """Write the solved map as text: a `d_new d_old` header, then rows."""
        if not self.solved:
            raise StateError("nothing to save before solve")
        write_matrix(path, self.matrix)

    @classmethod
    def load_map(cls, path, ridge: float = 1e-3) -> "MapEstimator":
        return cls.from_matrix(read_matrix(path), ridge=ridge)


def write_matrix(path, matrix: np.ndarray) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "w") as fh:
        fh.write(f"{matrix.shape[0]} {matrix.shape[1]}\n")
        for row in matrix:
            fh.write(" ".join(repr(v) for v in row.tolist()) + "\n")


def read_matrix(path) -> np.ndarray:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 2:
            raise InvalidInputError(f"{path}: malformed matrix header")
        rows, cols = int(header[0]), int(header[1])
        matrix = np.empty((rows, cols))
        for i in range(rows):
            parts = fh.readline().split()
            if len(parts) != cols:
                raise InvalidInputError(f"{path}: row {i} has {len(parts)} values, expected {cols}")
            matrix[i] = [float(p) for p in parts]
    return matrix
