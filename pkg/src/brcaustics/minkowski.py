"""Minkowski space-time R^{n+1}_1 with signature (-, +, ..., +).

Vectors are plain numpy arrays whose last axis holds the components
(x0 = time, x1..xn = space).  All functions broadcast over leading axes.
"""

import enum

import numpy as np

from .errors import ValidationError
from .linalg import det

DEFAULT_TOL = 1e-9


class CausalCharacter(enum.Enum):
    SPACELIKE = "spacelike"
    LIGHTLIKE = "lightlike"
    TIMELIKE = "timelike"
    ZERO = "zero"


def mink_vector(x):
    """Validate and return ``x`` as a float vector of R^{n+1}_1, n >= 2."""
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.shape[0] < 3:
        raise ValidationError(f"a Minkowski vector needs at least 3 components, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError("Minkowski vector components must be finite")
    return v


def _check_dims(x, y):
    if x.shape[-1] != y.shape[-1]:
        raise ValidationError(f"dimension mismatch: {x.shape[-1]} vs {y.shape[-1]}")


def pseudo_dot(x, y):
    """<x, y> = -x0 y0 + sum_i xi yi."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_dims(x, y)
    return -x[..., 0] * y[..., 0] + np.sum(x[..., 1:] * y[..., 1:], axis=-1)


def mink_norm(x):
    """sqrt(|<x, x>|)."""
    return np.sqrt(np.abs(pseudo_dot(x, x)))


def conj(x):
    """(x0, x1, ..., xn) -> (-x0, x1, ..., xn); turns <x, .> into a Euclidean dot."""
    out = np.array(x, dtype=float, copy=True)
    out[..., 0] *= -1
    return out


def causal_character(x, tol=DEFAULT_TOL):
    """Classify a single vector; the lightlike band scales with |x|_inf^2."""
    if tol < 0:
        raise ValidationError("tolerance must be non-negative")
    x = np.asarray(x, dtype=float)
    sup = float(np.max(np.abs(x)))
    if sup <= tol:
        return CausalCharacter.ZERO
    q = float(pseudo_dot(x, x))
    if abs(q) <= tol * sup ** 2:
        return CausalCharacter.LIGHTLIKE
    return CausalCharacter.TIMELIKE if q < 0 else CausalCharacter.SPACELIKE


def wedge(vectors):
    """Generalized wedge product of n vectors of R^{n+1}_1.

    Formal expansion along the first row of the determinant whose first row
    is (-e0, e1, ..., en).  ``vectors`` may be a sequence of n arrays of shape
    (..., n+1) or one array of shape (..., n, n+1).
    """
    if isinstance(vectors, np.ndarray):
        rows = vectors.astype(float)
    else:
        rows = np.stack([np.asarray(v, dtype=float) for v in vectors], axis=-2)
    n = rows.shape[-2]
    if rows.shape[-1] != n + 1:
        raise ValidationError(f"wedge needs n vectors of dimension n+1, got {n} of dimension {rows.shape[-1]}")
    out = np.empty(rows.shape[:-2] + (n + 1,))
    for j in range(n + 1):
        minor = np.delete(rows, j, axis=-1)
        out[..., j] = (-1) ** j * det(minor)
    out[..., 0] *= -1
    return out


def on_lightcone(x, vertex, tol=DEFAULT_TOL):
    """True iff x lies on the lightcone LC(vertex), relative to max(1, |x - vertex|_inf^2)."""
    d = np.asarray(x, dtype=float) - np.asarray(vertex, dtype=float)
    scale = np.maximum(1.0, np.max(np.abs(d), axis=-1) ** 2)
    return np.abs(pseudo_dot(d, d)) <= tol * scale


def is_future_directed(x):
    """<x, e0> < 0, i.e. x0 > 0.  Zero vectors are rejected."""
    x = np.asarray(x, dtype=float)
    if not np.any(x):
        raise ValidationError("the zero vector has no time orientation")
    return bool(x[0] > 0)
