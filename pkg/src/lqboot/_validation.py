"""Input checking shared by every module.

Thin wrappers over :func:`sklearn.utils.check_array` that also enforce the
shape conventions of the package (states are p-vectors, parameters are
p x q matrices, ...). All raise :class:`ShapeError`, a ``ValueError``.
"""

import numpy as np
from sklearn.utils import check_array


class ShapeError(ValueError):
    """Array has the wrong shape for its role."""


def as_vector(x, size=None, name="x"):
    arr = check_array(np.atleast_1d(np.asarray(x, dtype=float)), ensure_2d=False,
                      ensure_min_samples=0, input_name=name)
    if arr.ndim != 1:
        raise ShapeError(f"{name} must be 1-D, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ShapeError(f"{name} must have length {size}, got {arr.shape[0]}")
    return arr


def as_matrix(m, shape=None, name="matrix"):
    arr = np.asarray(m, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got shape {arr.shape}")
    arr = check_array(arr, ensure_min_samples=0, ensure_min_features=0, input_name=name)
    if shape is not None:
        rows, cols = shape
        if (rows is not None and arr.shape[0] != rows) or (cols is not None and arr.shape[1] != cols):
            raise ShapeError(f"{name} must have shape {shape}, got {arr.shape}")
    return arr


def as_square(m, size=None, name="matrix"):
    arr = as_matrix(m, name=name)
    if arr.shape[0] != arr.shape[1]:
        raise ShapeError(f"{name} must be square, got shape {arr.shape}")
    if size is not None and arr.shape[0] != size:
        raise ShapeError(f"{name} must be {size}x{size}, got {arr.shape}")
    return arr


def as_samples(rows, width, name="samples"):
    """Stack a sequence of vectors into an (n, width) array."""
    arr = np.asarray(rows, dtype=float)
    if arr.size == 0:
        return np.zeros((0, width))
    if arr.ndim == 1 and width == 1:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[1] != width:
        raise ShapeError(f"{name} must have shape (n, {width}), got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr
