"""Momentary lightcone Gauss maps, second fundamental invariants and curvatures.

For a sign s in {+, -} the lightcone Gauss map is LG = nT + s nS.  Its
second fundamental invariants are h_ij = -<LG_{u_i}, X_{u_j}>, available two
ways:

(a) differentiate the frame field (jets of nS, nT) and pair with X_{u_j};
(b) differentiate <LG, X_{u_j}> = 0 instead, giving h_ij = <LG, X_{u_i u_j}>.

Path (b) only needs second derivatives of the embedding and is the one
reported; path (a) is computed alongside and must agree.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NotSpacelike, NumericalFailure, ValidationError
from .linalg import cholesky, det, generalized_eigh
from .minkowski import pseudo_dot
from .worldsheet import build_frame, require_curve_sheet


def check_sign(sign):
    if sign not in ("+", "-"):
        raise ValidationError(f"sign must be '+' or '-', got {sign!r}", "sign")
    return 1.0 if sign == "+" else -1.0


def lightcone_gauss(frame, sign):
    """LG = nT + nS or nT - nS; lightlike and future directed."""
    check_sign(sign)
    if not np.all(np.isfinite(frame.nS)):
        raise NumericalFailure("lightcone Gauss map of an invalid frame")
    return frame.LG(sign)


@dataclass
class SheetData:
    """Flattened per-point geometry on a batch of (u, t) samples.

    Arrays have a leading axis of length N = prod(shape); entries at invalid
    samples (``ok`` False) are NaN.
    """
    shape: tuple
    u: list
    t: np.ndarray
    ok: np.ndarray
    X: np.ndarray
    Xu: np.ndarray       # (N, k, d)
    Xt: np.ndarray
    Xuu: np.ndarray      # (N, k, k, d)
    g: np.ndarray        # (N, k, k)
    nS: np.ndarray
    nT: np.ndarray
    nSu: np.ndarray      # (N, k, d) derivative of nS along u_i (NaN if not requested)
    nTu: np.ndarray

    @property
    def k(self):
        return self.Xu.shape[1]

    def LG(self, sign):
        return self.nT + check_sign(sign) * self.nS

    def LGu(self, sign):
        return self.nTu + check_sign(sign) * self.nSu

    def reshape(self, a):
        return a.reshape(self.shape + a.shape[1:])


def sheet_data(ws, u, t, frame_derivatives=True):
    """Evaluate embedding derivatives and frames (and the frame derivatives) on a batch."""
    us = ws.split_u(u)
    shape = np.broadcast_shapes(*[np.shape(x) for x in us], np.shape(t))
    us = [np.broadcast_to(x, shape).ravel() for x in us]
    t = np.broadcast_to(np.asarray(t, dtype=float), shape).ravel()
    N, k, d = t.size, ws.n - 1, ws.dim

    jet = ws.jet(us, t, 2)
    Xu_list = [jet.deriv(name) for name in ws.u_names]
    Xt_jet = jet.deriv("t")
    X = jet.value
    Xu = np.stack([x.value for x in Xu_list], axis=1)
    Xuu = np.stack([np.stack([Xu_list[i].partial(ws.u_names[j]) for j in range(k)], axis=1)
                    for i in range(k)], axis=1)
    f = build_frame(X, [x.value for x in Xu_list], Xt_jet.value,
                    ws.tol["immersion"], ws.tol["causal"])
    ok = f.ok
    nSu = np.full((N, k, d), np.nan)
    nTu = np.full((N, k, d), np.nan)
    if frame_derivatives and np.any(ok):
        sel = np.flatnonzero(ok)
        fj = build_frame(jet[sel], [x[sel] for x in Xu_list], Xt_jet[sel], safe=False)
        for i, name in enumerate(ws.u_names):
            nSu[sel, i] = fj.nS.deriv(name).value
            nTu[sel, i] = fj.nT.deriv(name).value
    return SheetData(shape=shape, u=us, t=t, ok=ok, X=X, Xu=Xu, Xt=Xt_jet.value, Xuu=Xuu,
                     g=f.g_matrix(), nS=f.nS, nT=f.nT, nSu=nSu, nTu=nTu)


def second_fundamental_pair(data, sign):
    """(h via path (b), h via path (a)), each (N, k, k)."""
    LG = data.LG(sign)
    h_b = pseudo_dot(LG[:, None, None, :], data.Xuu)
    h_a = -pseudo_dot(data.LGu(sign)[:, :, None, :], data.Xu[:, None, :, :])
    return h_b, h_a


def dual_path_gap(h_b, h_a):
    """Relative disagreement of the two second fundamental form paths, per sample."""
    scale = np.maximum(1.0, np.max(np.abs(h_b), axis=(-2, -1)))
    return np.max(np.abs(h_b - h_a), axis=(-2, -1)) / scale


def second_fundamental(ws, u, t, sign, tol=None):
    """Lightcone second fundamental invariants h[sign] at (u, t).

    Both computation paths are evaluated; a disagreement beyond ``tol``
    (default: the scene's dual-path tolerance) raises NumericalFailure.
    Returns a (k, k) matrix for a single point, (..., k, k) for a batch.
    """
    check_sign(sign)
    data = sheet_data(ws, u, t)
    if not np.all(data.ok):
        ws.frame_at(*_first_bad(data))  # raises the precise frame error
    h_b, h_a = second_fundamental_pair(data, sign)
    tol = ws.tol["dual_path"] if tol is None else tol
    gap = dual_path_gap(h_b, h_a)
    if np.any(gap > tol):
        i = int(np.argmax(gap))
        raise NumericalFailure(f"second fundamental form paths disagree by {gap[i]:.3g} "
                               f"at t={data.t[i]:.6g} (tolerance {tol:g})")
    return data.reshape(h_b)


def _first_bad(data):
    i = int(np.flatnonzero(~data.ok)[0])
    return [x[i] for x in data.u], data.t[i]


@dataclass
class CurvatureData:
    sign: str
    h: np.ndarray
    weingarten: np.ndarray
    kappas: np.ndarray
    eigvecs: np.ndarray
    K: np.ndarray


def principal_curvatures(frame, h, sign=None):
    """Generalized eigenvalues of (h, g): the lightcone principal curvatures.

    ``frame`` may be a MomentaryFrame or anything with a ``g`` matrix, or the
    metric array itself.  Works batched over leading axes.
    """
    g = np.asarray(getattr(frame, "g", frame), dtype=float)
    h = np.asarray(h, dtype=float)
    _, ok = cholesky(g)
    if not np.all(ok):
        raise NotSpacelike("first fundamental form of the momentary space is not positive definite")
    kappas, vecs, _ = generalized_eigh(h, g)
    weingarten = h @ np.linalg.inv(g)
    return CurvatureData(sign=sign, h=h, weingarten=weingarten, kappas=kappas, eigvecs=vecs,
                         K=det(weingarten))


def curvatures_on(data, sign):
    """Principal curvatures at the valid samples of ``data`` (NaN elsewhere)."""
    h_b, _ = second_fundamental_pair(data, sign)
    k = data.k
    eye = np.broadcast_to(np.eye(k), data.g.shape)
    g = np.where(data.ok[:, None, None], data.g, eye)
    h = np.where(data.ok[:, None, None], h_b, 0.0)
    kappas, vecs, _ = generalized_eigh(h, g)
    kappas[~data.ok] = np.nan
    return kappas, vecs, h_b


def weingarten_residuals(data, sign):
    """Residuals of the two lightcone Weingarten formulae, per sample, relative.

    (b): Pi(LG_{u_i}) + sum_j h_i^j X_{u_j}, Pi the g-orthogonal projection
         onto the tangent span;
    (a): LG_{u_i} -+ <nS, nT_{u_i}> LG + sum_j h_i^j X_{u_j}.
    """
    s = check_sign(sign)
    h_b, _ = second_fundamental_pair(data, sign)
    ok = data.ok
    g = np.where(ok[:, None, None], data.g, np.eye(data.k))
    ginv = np.linalg.inv(g)
    hm = h_b @ ginv                                   # h_i^j
    tang = np.einsum("nij,njd->nid", hm, data.Xu)     # sum_j h_i^j X_{u_j}
    LGu = data.LGu(sign)
    coef = np.einsum("nkl,nil->nik", ginv, pseudo_dot(LGu[:, :, None, :], data.Xu[:, None, :, :]))
    proj = np.einsum("nik,nkd->nid", coef, data.Xu)
    res_b = proj + tang
    beta = pseudo_dot(data.nS[:, None, :], data.nTu)  # <nS, nT_{u_i}>
    res_a = LGu - s * beta[..., None] * data.LG(sign)[:, None, :] + tang
    scale = np.maximum(1.0, np.max(np.abs(LGu), axis=(-2, -1)))
    ra = np.max(np.abs(res_a), axis=(-2, -1)) / scale
    rb = np.max(np.abs(res_b), axis=(-2, -1)) / scale
    return np.where(ok, ra, np.nan), np.where(ok, rb, np.nan)


@dataclass
class EvoluteCloud:
    points: np.ndarray   # (m, 3)
    branch: np.ndarray   # (m,)
    kappa: np.ndarray
    u: np.ndarray
    t: np.ndarray
    complex_samples: int
    skipped: int
    complex_where: np.ndarray  # (c, 2) (u, t) of samples with complex curvatures


def evolute_points(ws, counts=None, tol=None):
    """Evolute of the timelike surface: X + nS / kappa over real principal curvatures.

    The shape operator is taken with respect to nS using the Lorentzian first
    fundamental form of the whole sheet.  That form is indefinite, so the
    curvatures may be complex; such samples are counted and listed, not emitted.
    """
    require_curve_sheet(ws)
    tol = ws.tol["kappa_zero"] if tol is None else tol
    us, t = ws.grid(counts)
    u = us[0].ravel()
    t = t.ravel()
    jet = ws.jet([u], t, 2)
    Xs, Xt = jet.deriv("u1"), jet.deriv("t")
    f = build_frame(jet.value, [Xs.value], Xt.value, ws.tol["immersion"], ws.tol["causal"])
    ok = f.ok
    E = pseudo_dot(Xs.value, Xs.value)
    F = pseudo_dot(Xs.value, Xt.value)
    G = pseudo_dot(Xt.value, Xt.value)
    L = pseudo_dot(f.nS, Xs.partial("u1"))
    M = pseudo_dot(f.nS, Xs.partial("t"))
    N = pseudo_dot(f.nS, Xt.partial("t"))
    with np.errstate(all="ignore"):
        dI = E * G - F * F
        a11 = (G * L - F * M) / dI
        a12 = (G * M - F * N) / dI
        a21 = (E * M - F * L) / dI
        a22 = (E * N - F * M) / dI
        tr = a11 + a22
        dt = a11 * a22 - a12 * a21
        disc = tr * tr - 4 * dt
    scale = np.maximum(1.0, tr * tr)
    real = ok & (disc >= -1e-12 * scale)
    cplx = ok & ~real
    root = np.sqrt(np.where(real, np.maximum(disc, 0.0), 0.0))
    pts, br, kap, uu, tt = [], [], [], [], []
    for b, kappa in enumerate(((tr - root) / 2, (tr + root) / 2)):
        m = real & (np.abs(kappa) > tol)
        pts.append(f.X[m] + f.nS[m] / kappa[m][:, None])
        br.append(np.full(int(m.sum()), b))
        kap.append(kappa[m])
        uu.append(u[m])
        tt.append(t[m])
    return EvoluteCloud(points=np.concatenate(pts), branch=np.concatenate(br), kappa=np.concatenate(kap),
                        u=np.concatenate(uu), t=np.concatenate(tt), complex_samples=int(cplx.sum()),
                        skipped=int((~ok).sum()), complex_where=np.stack([u[cplx], t[cplx]], axis=-1))
