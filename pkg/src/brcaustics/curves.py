"""Momentary curves of a world sheet in 3-dimensional space-time.

Along each momentary curve s -> X(s, t) we use the pseudo-orthonormal frame
(b, n, t): t the unit tangent, n = nS the spacelike normal of the sheet and
b = n ^ t the timelike one (which equals nT).  The orientation of s is flipped
where needed so that b is future directed.  With ' the arclength derivative,

    t' = -kappa_g b + kappa_n n,   n' = tau_g b - kappa_n t,   b' = tau_g n - kappa_g t,

and the lightcone principal curvatures are kappa_g +- kappa_n.  The invariant

    sigma+- = (kappa_n +- kappa_g) tau_g -+ (kappa_n' +- kappa_g')

decides the light-sheet singularity type: cuspidal edge where sigma != 0,
swallowtail where sigma = 0 and sigma' != 0.

Everything is computed by jet propagation: an order-4 jet of X in (s, t)
yields sigma as an order-1 jet, hence sigma and its s-derivative.
"""

import enum
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ValidationError
from .lightcone import check_sign
from .minkowski import pseudo_dot
from .worldsheet import rdot, require_curve_sheet, rwedge

CURVE_JET_ORDER = 4


class Singularity(enum.Enum):
    REGULAR = "Regular"
    CUSPIDAL_EDGE = "CuspidalEdge"
    SWALLOWTAIL = "Swallowtail"
    CONICAL_DEGENERATE = "ConicalDegenerate"
    UNRESOLVED = "Unresolved"


class SmoothnessWarning(UserWarning):
    """Finite-difference derivatives changed noticeably when the step was doubled."""


@dataclass
class CurveFrame:
    t_vec: np.ndarray
    n_vec: np.ndarray
    b_vec: np.ndarray
    kappa_g: np.ndarray
    kappa_n: np.ndarray
    tau_g: np.ndarray
    speed: np.ndarray
    orientation: np.ndarray   # +1 where s runs along t_vec, -1 where it was flipped


@dataclass
class _CurveJets:
    X: object
    t: object
    n: object
    b: object
    kg: object
    kn: object
    tg: object
    speed: np.ndarray
    eps: np.ndarray
    D: object  # arclength derivative operator on jets


def _curve_jets(ws, s, t, order=CURVE_JET_ORDER, mode=None, step=None):
    require_curve_sheet(ws)
    X = ws.jet([s], t, order, mode=mode, step=step)
    Xs, Xt = X.deriv("u1"), X.deriv("t")
    W = rwedge([Xs, Xt])
    n = W * (rdot(W, W).sqrt().reciprocal())[..., None]
    speed_j = rdot(Xs, Xs).sqrt()
    inv_speed = speed_j.reciprocal()
    unit = Xs * inv_speed[..., None]
    b0 = rwedge([n, unit])
    eps = np.where(b0.value[..., 0] < 0, -1.0, 1.0)
    tv = unit * eps[..., None]
    b = b0 * eps[..., None]
    scale = inv_speed * eps

    def D(f):
        """Arclength derivative of a jet (scalar or vector field)."""
        df = f.deriv("u1")
        sc = scale if len(df.shape) == len(scale.shape) else scale[..., None]
        return df * sc

    tp = D(tv)
    kg = rdot(tp, b)
    kn = rdot(tp, n)
    tg = rdot(D(b), n)
    return _CurveJets(X=X, t=tv, n=n, b=b, kg=kg, kn=kn, tg=tg, speed=speed_j.value, eps=eps, D=D)


def frenet_frame(ws, s, t):
    """Frame (t, n, b) and curvatures kappa_g, kappa_n, tau_g in the arclength convention."""
    cj = _curve_jets(ws, np.asarray(s, dtype=float), np.asarray(t, dtype=float), order=2)
    if np.any(cj.speed <= 1e-12):
        raise ValidationError("momentary curve is not regular here (zero speed)", "s")
    return CurveFrame(t_vec=cj.t.value, n_vec=cj.n.value, b_vec=cj.b.value, kappa_g=cj.kg.value,
                      kappa_n=cj.kn.value, tau_g=cj.tg.value, speed=cj.speed, orientation=cj.eps)


def frenet_residuals(ws, s, t):
    """Largest component of t' + kg b - kn n, n' - tg b + kn t, b' - tg n + kg t."""
    cj = _curve_jets(ws, np.asarray(s, dtype=float), np.asarray(t, dtype=float), order=2)
    kg, kn, tg = cj.kg.value[..., None], cj.kn.value[..., None], cj.tg.value[..., None]
    tv, n, b = cj.t.truncate(1), cj.n.truncate(1), cj.b.truncate(1)
    r1 = cj.D(tv).value + kg * b.value - kn * n.value
    r2 = cj.D(n).value - tg * b.value + kn * tv.value
    r3 = cj.D(b).value - tg * n.value + kg * tv.value
    return np.max(np.abs(np.stack([r1, r2, r3], axis=-2)), axis=(-2, -1))


def lightcone_curvatures(ws, s, t):
    """(kappa+, kappa-) = (kappa_g + kappa_n, kappa_g - kappa_n)."""
    f = frenet_frame(ws, s, t)
    return f.kappa_g + f.kappa_n, f.kappa_g - f.kappa_n


def _sigma_from(cj, sign):
    sg = check_sign(sign)
    kn1, kg1 = cj.D(cj.kn), cj.D(cj.kg)
    kn, kg, tg = cj.kn.truncate(1), cj.kg.truncate(1), cj.tg.truncate(1)
    sigma = (kn + kg * sg) * tg - (kn1 + kg1 * sg) * sg
    return sigma.value, cj.D(sigma).value


def sigma_invariant(ws, s, t, sign):
    """(sigma, dsigma/ds) with ' the arclength derivative in the oriented direction.

    In finite-difference mode the computation is repeated with a doubled
    step; a large change raises a SmoothnessWarning.
    """
    s = np.asarray(s, dtype=float)
    t = np.asarray(t, dtype=float)
    cj = _curve_jets(ws, s, t)
    sig, dsig = _sigma_from(cj, sign)
    if ws.scene.diff_mode == "finite_difference":
        cj2 = _curve_jets(ws, s, t, mode="finite_difference", step=2 * ws.scene.fd_step)
        sig2, dsig2 = _sigma_from(cj2, sign)
        scale = _curvature_scale(cj)
        gap = max(float(np.max(np.abs(sig - sig2) / scale ** 2)), float(np.max(np.abs(dsig - dsig2) / scale ** 3)))
        if gap > 1e-3:
            warnings.warn(f"sigma changed by {gap:.2g} (relative) when doubling the finite-difference step; "
                          "the step is too coarse for third and fourth derivatives", SmoothnessWarning)
    return sig, dsig


def _curvature_scale(cj):
    return np.maximum.reduce([np.abs(cj.kg.value), np.abs(cj.kn.value), np.abs(cj.tg.value),
                              np.full(np.shape(cj.kg.value), 1e-300)])


@dataclass
class SingularityClass:
    tag: Singularity
    sigma: float
    dsigma_ds: float
    s: float = np.nan
    t: float = np.nan
    sign: str = "+"


def _tags(sig, dsig, scale, conical, rel_tol):
    tol0 = rel_tol * scale ** 2
    tol1 = rel_tol * scale ** 3
    a, b = np.abs(sig), np.abs(dsig)
    tags = np.full(np.shape(sig), Singularity.UNRESOLVED, dtype=object)
    tags[a > 10 * tol0] = Singularity.CUSPIDAL_EDGE
    sw = (a <= tol0) & (b > 10 * tol1)
    tags[sw] = Singularity.SWALLOWTAIL
    flat = (a <= tol0) & (b <= tol1)
    tags[flat & conical] = Singularity.CONICAL_DEGENERATE
    return tags


def classify_lightsheet_point(ws, s, t, sign):
    """Singularity type of the light sheet at its focal point over (s, t)."""
    check_sign(sign)
    s, t = float(s), float(t)
    cj = _curve_jets(ws, np.array([s]), np.array([t]))
    kappa = cj.kg.value + check_sign(sign) * cj.kn.value
    if abs(kappa[0]) <= ws.tol["kappa_zero"]:
        raise ValidationError("no focal point here: the lightcone principal curvature vanishes", "s")
    sig, dsig = _sigma_from(cj, sign)
    scale = _curvature_scale(cj)
    conical = np.array([False])
    if abs(sig[0]) <= ws.tol["sigma"] * scale[0] ** 2 and abs(dsig[0]) <= ws.tol["sigma"] * scale[0] ** 3:
        conical = np.array([detect_conical_momentary_curve(ws, t, sign) is not None])
    tag = _tags(sig, dsig, scale, conical, ws.tol["sigma"])[0]
    return SingularityClass(tag=tag, sigma=float(sig[0]), dsigma_ds=float(dsig[0]), s=s, t=t, sign=sign)


def detect_conical_momentary_curve(ws, t0, sign, counts=None, tol=None):
    """Vertex lam with the whole momentary curve on the lightcone LC(lam), or None.

    Requires sigma to vanish on every sample of the slice; the candidate
    vertex is the mean of the focal points and is accepted only if every
    sampled point of the curve is lightlike-separated from it.
    """
    require_curve_sheet(ws)
    check_sign(sign)
    tol = ws.tol["sigma"] if tol is None else tol
    s = ws.axes(counts)[0]
    tt = np.full(s.size, float(t0))
    cj = _curve_jets(ws, s, tt)
    sig, _ = _sigma_from(cj, sign)
    scale = _curvature_scale(cj)
    if np.any(np.abs(sig) > tol * scale ** 2):
        return None
    kappa = cj.kg.value + check_sign(sign) * cj.kn.value
    if np.any(np.abs(kappa) <= ws.tol["kappa_zero"]):
        return None
    X = cj.X.value
    LG = cj.b.value + check_sign(sign) * cj.n.value
    focal = X + LG / kappa[:, None]
    lam = focal.mean(axis=0)
    d = X - lam
    if np.any(np.abs(pseudo_dot(d, d)) > tol * np.maximum(1.0, np.max(np.abs(d), axis=-1) ** 2)):
        return None
    return lam


def conical_evidence(ws, t0, sign, counts=None):
    """The three quantities behind the conical test, for reporting.

    Returns (max |sigma|, focal spread, lightcone residual of the curve with
    respect to the mean focal point).
    """
    s = ws.axes(counts)[0]
    cj = _curve_jets(ws, s, np.full(s.size, float(t0)))
    sig, _ = _sigma_from(cj, sign)
    kappa = cj.kg.value + check_sign(sign) * cj.kn.value
    LG = cj.b.value + check_sign(sign) * cj.n.value
    focal = cj.X.value + LG / kappa[:, None]
    spread = float(np.max(np.abs(focal[:, None, :] - focal[None, :, :])))
    lam = focal.mean(axis=0)
    d = cj.X.value - lam
    return float(np.max(np.abs(sig))), spread, float(np.max(np.abs(pseudo_dot(d, d)))), lam


def classify_slice(ws, t, sign, counts=None, xtol=1e-12):
    """Classify every sample of one momentary curve, with swallowtails located by bisection.

    Grid samples whose sigma is within tolerance of zero are replaced by the
    bisection-refined root when sigma changes sign across them.  Returns a
    list of SingularityClass ordered by s.
    """
    require_curve_sheet(ws)
    check_sign(sign)
    s = ws.axes(counts)[0]
    tt = np.full(s.size, float(t))
    cj = _curve_jets(ws, s, tt)
    sig, dsig = _sigma_from(cj, sign)
    scale = _curvature_scale(cj)
    kappa = cj.kg.value + check_sign(sign) * cj.kn.value
    focal = np.abs(kappa) > ws.tol["kappa_zero"]
    tol0 = ws.tol["sigma"] * scale ** 2
    zero = np.abs(sig) <= tol0
    sgn = np.where(zero, 0.0, np.sign(sig))
    periodic = ws.periodic[0]
    period = ws.scene.u_domain[0][1] - ws.scene.u_domain[0][0]

    def sigma_at(x):
        v, _ = _sigma_from(_curve_jets(ws, np.array([x]), np.array([float(t)])), sign)
        return float(v[0])

    roots = []
    N = s.size
    last = N if periodic else N - 1
    for i in range(last):
        j = (i + 1) % N
        if sgn[i] * sgn[j] < 0:
            lo, hi = s[i], s[j] + (period if j < i else 0.0)
            roots.append(brentq(sigma_at, lo, hi, xtol=xtol))
    # zero samples bracketed by opposite signs
    for i in np.flatnonzero(zero):
        im, ip = (i - 1) % N, (i + 1) % N
        if not periodic and (i == 0 or i == N - 1):
            roots.append(s[i])
            continue
        if sgn[im] * sgn[ip] < 0:
            lo = s[im] - (period if im > i else 0.0)
            hi = s[ip] + (period if ip < i else 0.0)
            roots.append(brentq(sigma_at, lo, hi, xtol=xtol))
        else:
            roots.append(s[i])
    roots = np.array(sorted(roots))
    if periodic and roots.size:
        a = ws.scene.u_domain[0][0]
        roots = a + np.mod(roots - a, period)
    out = []
    keep = ~zero & focal
    conical = np.zeros(N, dtype=bool)
    if np.all(zero):
        conical[:] = detect_conical_momentary_curve(ws, t, sign, counts) is not None
    tags = _tags(sig, dsig, scale, conical, ws.tol["sigma"])
    for i in np.flatnonzero(keep | (zero & conical)):
        out.append(SingularityClass(tag=tags[i], sigma=float(sig[i]), dsigma_ds=float(dsig[i]),
                                    s=float(s[i]), t=float(t), sign=sign))
    if not np.all(zero) and roots.size:
        rj = _curve_jets(ws, roots, np.full(roots.size, float(t)))
        rs, rd = _sigma_from(rj, sign)
        rk = rj.kg.value + check_sign(sign) * rj.kn.value
        rt = _tags(rs, rd, _curvature_scale(rj), np.zeros(roots.size, dtype=bool), ws.tol["sigma"])
        for i in range(roots.size):
            if abs(rk[i]) > ws.tol["kappa_zero"]:
                out.append(SingularityClass(tag=rt[i], sigma=float(rs[i]), dsigma_ds=float(rd[i]),
                                            s=float(roots[i]), t=float(t), sign=sign))
    out.sort(key=lambda c: c.s)
    return out
