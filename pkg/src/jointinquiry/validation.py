"""Input validation helpers for the estimator-style entry points."""

import numpy as np
from sklearn.utils.validation import check_array

from .exceptions import ValidationError
from .world import MeasurementLocation


def check_locations(X):
    """Coerce ``X`` to a float array of shape (n, 2).

    Accepts array-likes and sequences of :class:`MeasurementLocation`.
    """
    if len(X) and isinstance(X[0], MeasurementLocation):
        X = [[m.x, m.y] for m in X]
    try:
        X = check_array(X, dtype=float, ensure_2d=True)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc
    if X.shape[1] != 2:
        raise ValidationError(f"locations must have 2 columns (x, y), got {X.shape[1]}")
    return X


def check_intensities(y, n):
    y = np.asarray(y, dtype=float).ravel()
    if y.size != n:
        raise ValidationError(f"got {y.size} intensities for {n} locations")
    if np.any((y < 0) | (y > 1)) or not np.all(np.isfinite(y)):
        raise ValidationError("intensities must lie in [0, 1]")
    return y
