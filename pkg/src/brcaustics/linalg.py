"""Small dense linear algebra, batched over leading axes.

Everything here works on stacks of tiny matrices (..., k, k), which is the
shape the grid computations produce: one 1x1 or 2x2 metric per sample point.
"""

import numpy as np

from .errors import ValidationError


def det(a):
    """Determinant of (..., k, k) matrices.

    Cofactor formulas for k <= 3, LU with partial pivoting otherwise.
    """
    a = np.asarray(a, dtype=float)
    k = a.shape[-1]
    if a.shape[-2] != k:
        raise ValidationError(f"determinant needs square matrices, got {a.shape[-2:]}")
    if k == 0:
        return np.ones(a.shape[:-2])
    if k == 1:
        return a[..., 0, 0]
    if k == 2:
        return a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    if k == 3:
        return (a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
                - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
                + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]))
    return np.linalg.det(a)


def laplace_det(rows):
    """Determinant of a square list-of-lists by first-row expansion.

    Only ring operations are used, so entries may be floats, arrays or jets.
    """
    k = len(rows)
    if k == 1:
        return rows[0][0]
    if k == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = None
    for j in range(k):
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        term = rows[0][j] * laplace_det(minor)
        if total is None:
            total = term
        elif j % 2:
            total = total - term
        else:
            total = total + term
    return total


def solve_generic(a, b):
    """Solve a x = b by Gaussian elimination without pivoting.

    ``a`` is a k x k list-of-lists and ``b`` a list, entries any field-like
    objects (floats, arrays, jets).  Meant for symmetric positive definite
    systems, where skipping the pivot search is safe.
    """
    k = len(b)
    a = [list(row) for row in a]
    b = list(b)
    for i in range(k):
        for r in range(i + 1, k):
            f = a[r][i] / a[i][i]
            for c in range(i, k):
                a[r][c] = a[r][c] - f * a[i][c]
            b[r] = b[r] - f * b[i]
    x = [None] * k
    for i in reversed(range(k)):
        acc = b[i]
        for c in range(i + 1, k):
            acc = acc - a[i][c] * x[c]
        x[i] = acc / a[i][i]
    return x


def cholesky(a):
    """Batched Cholesky factor of symmetric (..., k, k) matrices.

    Returns ``(L, ok)``; ``ok`` is False where the matrix is not positive
    definite, and the matching slices of ``L`` are garbage (NaN-free).
    """
    a = np.asarray(a, dtype=float)
    k = a.shape[-1]
    L = np.zeros_like(a)
    ok = np.ones(a.shape[:-2], dtype=bool)
    for j in range(k):
        d = a[..., j, j] - np.sum(L[..., j, :j] ** 2, axis=-1)
        ok &= d > 0
        ljj = np.sqrt(np.where(d > 0, d, 1.0))
        L[..., j, j] = ljj
        for i in range(j + 1, k):
            L[..., i, j] = (a[..., i, j] - np.sum(L[..., i, :j] * L[..., j, :j], axis=-1)) / ljj
    return L, ok


def lower_solve(L, b):
    """Forward substitution L x = b for batched lower-triangular L; b (..., k, m)."""
    k = L.shape[-1]
    x = np.zeros(np.broadcast_shapes(L.shape[:-2], b.shape[:-2]) + b.shape[-2:])
    for i in range(k):
        acc = b[..., i, :] - np.einsum("...j,...jm->...m", L[..., i, :i], x[..., :i, :])
        x[..., i, :] = acc / L[..., i, i][..., None]
    return x


def jacobi_eigh(a, tol=1e-15, max_sweeps=50):
    """Eigen-decomposition of symmetric (..., k, k) matrices by cyclic Jacobi.

    Returns eigenvalues sorted ascending and the matching eigenvectors as
    columns.  Rotations are applied to the whole batch at once; entries that
    are already negligible get an identity rotation.
    """
    a = np.array(a, dtype=float, copy=True)
    k = a.shape[-1]
    v = np.broadcast_to(np.eye(k), a.shape).copy()
    if k > 1:
        for _ in range(max_sweeps):
            off = np.sqrt(np.sum(np.triu(a, 1) ** 2, axis=(-2, -1)))
            scale = np.sqrt(np.sum(a ** 2, axis=(-2, -1)))
            if np.all(off <= tol * np.maximum(scale, 1e-300)):
                break
            for p in range(k - 1):
                for q in range(p + 1, k):
                    apq = a[..., p, q]
                    small = np.abs(apq) <= 1e-300
                    theta = (a[..., q, q] - a[..., p, p]) / np.where(small, 1.0, 2.0 * apq)
                    t = np.sign(theta) / (np.abs(theta) + np.hypot(theta, 1.0))
                    t = np.where(theta == 0, 1.0, t)
                    t = np.where(small, 0.0, t)
                    c = 1.0 / np.hypot(t, 1.0)
                    s = t * c
                    rot = np.broadcast_to(np.eye(k), a.shape).copy()
                    rot[..., p, p] = c
                    rot[..., q, q] = c
                    rot[..., p, q] = s
                    rot[..., q, p] = -s
                    a = np.swapaxes(rot, -1, -2) @ a @ rot
                    v = v @ rot
    w = np.diagonal(a, axis1=-2, axis2=-1).copy()
    order = np.argsort(w, axis=-1)
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return w, v


def generalized_eigh(h, g):
    """Solve h v = kappa g v for symmetric h and SPD g, batched.

    Whitening with g = L L^T turns the pencil into the ordinary symmetric
    problem for L^-1 h L^-T.  Returns ``(kappas, vecs, ok)`` where ``vecs``
    are g-orthonormal columns and ``ok`` flags positive definiteness of g.
    """
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    L, ok = cholesky(g)
    k = g.shape[-1]
    eye = np.broadcast_to(np.eye(k), L.shape)
    Linv = lower_solve(np.where(ok[..., None, None], L, eye), eye)
    c = Linv @ h @ np.swapaxes(Linv, -1, -2)
    c = 0.5 * (c + np.swapaxes(c, -1, -2))
    w, y = jacobi_eigh(c)
    vecs = np.swapaxes(Linv, -1, -2) @ y
    return w, vecs, ok
