"""The Lorentz distance-squared function G(u, t, lam) = <X(u,t) - lam, X(u,t) - lam>.

G never looks at the lightcone frames, which makes it an independent oracle
for everything computed from them: focal points are exactly the lam where
g = G(., t, lam) has a degenerate critical point.

Sign convention used throughout the package: lam = X + mu * LG, so the
Hessian of g along the light sheet is 2(g_ij - mu h_ij) and focal points sit
at mu = 1/kappa.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import NumericalFailure, ValidationError
from .lightcone import check_sign, sheet_data
from .linalg import det
from .minkowski import conj, pseudo_dot

SCAN_SAMPLES = 512
EVEN_ROOT_TOL = 1e-12


class Verdict(enum.Enum):
    NON_CRITICAL = "NonCritical"
    CRITICAL = "Critical"
    DEGENERATE_CRITICAL = "DegenerateCritical"


def G_eval(ws, u, t, lam):
    x = ws.embed(u, t)
    d = x - np.asarray(lam, dtype=float)
    return pseudo_dot(d, d)


@dataclass
class CriticalityReport:
    g_value: float
    grad_u: np.ndarray
    hessian_u: np.ndarray
    det_hessian: float
    dG_dt: float
    verdict: Verdict
    scales: dict


def critical_quantities(X, Xu, Xt, Xuu, g, lam):
    """Batched g, grad, Hessian and dG/dt at lam (arrays with a leading batch axis)."""
    d = X - lam
    G = pseudo_dot(d, d)
    grad = 2 * pseudo_dot(Xu, d[..., None, :])
    hess = 2 * (pseudo_dot(Xuu, d[..., None, None, :]) + g)
    dGdt = 2 * pseudo_dot(Xt, d)
    return G, grad, hess, dGdt


def _scales(d, Xu, g):
    dn = np.max(np.abs(d), axis=-1)
    xun = np.max(np.abs(Xu), axis=(-2, -1))
    gn = np.max(np.abs(g), axis=(-2, -1))
    k = g.shape[-1]
    return {
        "g": np.maximum(1.0, dn ** 2),
        "grad": np.maximum(1.0, 2 * xun * dn),
        "det": np.maximum(1.0, (2 * gn) ** k),
    }


def classify_critical(G, grad, dH, scales, tol):
    crit = (np.abs(G) <= tol * scales["g"]) & np.all(np.abs(grad) <= tol * scales["grad"][..., None], axis=-1)
    degen = crit & (np.abs(dH) <= tol * scales["det"])
    return crit, degen


def criticality_check(ws, u, t, lam, tol=None):
    """Evaluate g, its u-gradient and Hessian at lam and classify the critical point."""
    tol = ws.tol["critical"] if tol is None else tol
    lam = np.asarray(lam, dtype=float)
    data = sheet_data(ws, u, t, frame_derivatives=False)
    if data.X.shape[0] != 1:
        raise ValidationError("criticality_check takes a single point", "u")
    d = data.X[0] - lam
    if np.max(np.abs(d)) <= 1e-14 * max(1.0, float(np.max(np.abs(lam)))):
        raise ValidationError("lambda coincides with X(u, t)", "lambda")
    G, grad, hess, dGdt = critical_quantities(data.X, data.Xu, data.Xt, data.Xuu, data.g, lam)
    dH = det(hess)
    scales = _scales(data.X - lam, data.Xu, data.g)
    crit, degen = classify_critical(G, grad, dH, scales, tol)
    verdict = Verdict.DEGENERATE_CRITICAL if degen[0] else Verdict.CRITICAL if crit[0] else Verdict.NON_CRITICAL
    return CriticalityReport(g_value=float(G[0]), grad_u=grad[0], hessian_u=hess[0], det_hessian=float(dH[0]),
                             dG_dt=float(dGdt[0]), verdict=verdict,
                             scales={k: float(v[0]) for k, v in scales.items()})


def _det_hessian_along(Xuu, g, LG, mus):
    """det H(g) at lam = X + mu LG for a vector of mu values: det(2(g - mu h))."""
    h = pseudo_dot(LG[None, None, :], Xuu)
    return det(2 * (g[None] - mus[:, None, None] * h[None]))


def focal_mu_roots(ws, u, t, sign, mu_range=None, samples=SCAN_SAMPLES, xtol=None):
    """Roots in mu of det H(g)(X + mu LG), by scanning and bracketing.

    Independent of the eigen-solver: only G's Hessian is used.  Sign changes
    give the odd-multiplicity roots; stationary points of det H where it
    vanishes give the even ones (umbilics).  All roots in ``mu_range`` are
    returned in increasing order.
    """
    check_sign(sign)
    mu_range = ws.scene.mu_range if mu_range is None else mu_range
    xtol = ws.tol["root"] if xtol is None else xtol
    data = sheet_data(ws, u, t, frame_derivatives=False)
    if data.X.shape[0] != 1:
        raise ValidationError("focal_mu_roots takes a single point", "u")
    if not data.ok[0]:
        ws.frame_at(u, t)
    Xuu, g, LG = data.Xuu[0], data.g[0], data.LG(sign)[0]

    def f(mu):
        return float(_det_hessian_along(Xuu, g, LG, np.array([mu]))[0])

    mus = np.linspace(mu_range[0], mu_range[1], samples)
    vals = _det_hessian_along(Xuu, g, LG, mus)
    roots = []
    for i in range(samples - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(mus[i])
        elif a * b < 0:
            roots.append(brentq(f, mus[i], mus[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps))
    if vals[-1] == 0.0:
        roots.append(mus[-1])
    # even-multiplicity roots do not change sign; det H is a polynomial of
    # degree k in mu, so its derivative is exact from k + 1 samples
    k = g.shape[-1]
    nodes = np.linspace(mu_range[0], mu_range[1], k + 1)
    poly = np.polynomial.Polynomial.fit(nodes, _det_hessian_along(Xuu, g, LG, nodes), k)
    dpoly = poly.deriv()
    dvals = dpoly(mus)
    cut = EVEN_ROOT_TOL * max(1.0, float(np.max(np.abs(vals))))
    for i in range(samples - 1):
        if dvals[i] * dvals[i + 1] < 0:
            r = brentq(dpoly, mus[i], mus[i + 1], xtol=xtol, rtol=4 * np.finfo(float).eps)
            if abs(f(r)) <= cut and all(abs(r - x) > 1e3 * xtol for x in roots):
                roots.append(r)
    return sorted(roots)


@dataclass
class MorseReport:
    singular_values: np.ndarray
    rank: int
    rank_ok: bool
    dG_dt: float
    dt_ok: bool

    @property
    def passed(self):
        return self.rank_ok and self.dt_ok


def verify_morse_family(ws, u, t, lam, sign=None, tol=None):
    """Non-degeneracy of G as a graph-like Morse family at a point of Sigma_*(G).

    (a) the Jacobian of (G, dG/du_1, ..., dG/du_{n-1}) in lam has rank n;
    (b) dG/dt = 2 <X_t, X - lam> does not vanish.
    """
    rep = criticality_check(ws, u, t, lam, tol)
    if rep.verdict is Verdict.NON_CRITICAL:
        raise ValidationError("point is not in the critical set of G", "lambda")
    data = sheet_data(ws, u, t, frame_derivatives=False)
    d = data.X[0] - np.asarray(lam, dtype=float)
    rows = [-2 * conj(d)] + [-2 * conj(xu) for xu in data.Xu[0]]
    sv = np.linalg.svd(np.stack(rows), compute_uv=False)
    cut = ws.tol["rank"] * sv[0]
    rank = int(np.sum(sv > cut))
    dt_scale = max(1.0, 2 * float(np.max(np.abs(data.Xt[0]))) * float(np.max(np.abs(d))))
    return MorseReport(singular_values=sv, rank=rank, rank_ok=rank == ws.n, dG_dt=rep.dG_dt,
                       dt_ok=abs(rep.dG_dt) > ws.tol["critical"] * dt_scale)


def legendrian_lift(ws, u, t, mu, sign):
    """The point (lam, t, p) of J^1 over Sigma_*(G) with lam = X + mu LG.

    p = conj(LG) / <X_t, nT>, which makes dt - sum p_i dlam_i vanish along
    Sigma_*(G).  Works batched over broadcast (u, t, mu).
    """
    check_sign(sign)
    mu = np.asarray(mu, dtype=float)
    if np.any(mu == 0):
        raise ValidationError("mu = 0 is the sheet itself, not a point of the lift", "mu")
    data = sheet_data(ws, u, t, frame_derivatives=False)
    if not np.all(data.ok):
        bad = int(np.flatnonzero(~data.ok)[0])
        ws.frame_at([x[bad] for x in data.u], data.t[bad])
    LG = data.LG(sign)
    denom = pseudo_dot(data.Xt, data.nT)
    if np.any(np.abs(denom) < 1e-14):
        raise NumericalFailure("<X_t, nT> vanishes; the lift is not graph-like here")
    mu = np.broadcast_to(mu, data.shape).ravel()
    lam = data.X + mu[:, None] * LG
    p = conj(LG) / denom[:, None]
    return data.reshape(lam), data.reshape(data.t), data.reshape(p)


def contact_residual(ws, path, sign, r, h=1e-5):
    """|dt/dr - p . dlam/dr| along a curve r -> (u(r), t(r), mu(r)) in Sigma_*(G).

    ``path`` maps an array of r values to (u list, t, mu).  Derivatives are
    central differences with step ``h``.  Returns (residual, scale) arrays.
    """
    r = np.asarray(r, dtype=float)
    lam0, t0, p0 = legendrian_lift(ws, *path(r), sign)
    lam_p, t_p, _ = legendrian_lift(ws, *path(r + h), sign)
    lam_m, t_m, _ = legendrian_lift(ws, *path(r - h), sign)
    dlam = (lam_p - lam_m) / (2 * h)
    dt = (t_p - t_m) / (2 * h)
    res = np.abs(dt - np.sum(p0 * dlam, axis=-1))
    scale = np.maximum(1.0, np.max(np.abs(p0), axis=-1) * np.max(np.abs(dlam), axis=-1))
    return res, scale


def tangent_lightcone_contact(ws, u, t, lam, tol=None):
    """True iff the lightcone with vertex lam is tangent to the momentary space at X(u, t)."""
    rep = criticality_check(ws, u, t, lam, tol)
    return rep.verdict is not Verdict.NON_CRITICAL


def distance_germ_jet(ws, s, t, lam, order=5):
    """Derivatives (g', g'', ..., g^(order)) of g(s) = G(s, t, lam) along a momentary curve."""
    from .worldsheet import rdot, require_curve_sheet
    require_curve_sheet(ws)
    X = ws.jet([np.asarray(s, dtype=float)], np.asarray(t, dtype=float), order, directions=("u1",))
    d = X - np.asarray(lam, dtype=float)
    g = rdot(d, d)
    return [g.derivative((k,)) for k in range(1, order + 1)]
