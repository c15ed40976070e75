"""Light sheets, lightlike focal sets, BR-caustics and BR-Maxwell sets.

Light sheet: LH(u, t, mu) = X(u, t) + mu LG(u, t).  Focal points are the
critical values of LH in (u, mu); they sit at mu = 1/kappa for each nonzero
lightcone principal curvature kappa.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .distance import _scales, classify_critical, critical_quantities
from .errors import NumericalFailure, ValidationError
from .lightcone import check_sign, curvatures_on, sheet_data
from .linalg import det
from .worldsheet import require_curve_sheet


@dataclass(frozen=True)
class FocalPoint:
    lam: np.ndarray
    t: float
    u: tuple
    sign: str
    branch: int
    kappa: float
    mu: float


def light_sheet_point(ws, u, t, mu, sign):
    """X(u, t) + mu LG(u, t); batched over broadcast (u, t, mu)."""
    check_sign(sign)
    data = sheet_data(ws, u, t, frame_derivatives=False)
    if not np.all(data.ok):
        bad = int(np.flatnonzero(~data.ok)[0])
        ws.frame_at([x[bad] for x in data.u], data.t[bad])
    mu = np.broadcast_to(np.asarray(mu, dtype=float), data.shape).ravel()
    return data.reshape(data.X + mu[:, None] * data.LG(sign))


def _focal_arrays(ws, data, sign):
    """Focal points of every valid sample in ``data`` for one sign, plus oracle flags."""
    kappas, _, _ = curvatures_on(data, sign)
    LG = data.LG(sign)
    tol0 = ws.tol["kappa_zero"]
    out = []
    for b in range(data.k):
        kap = kappas[:, b]
        m = data.ok & (np.abs(kap) > tol0)
        idx = np.flatnonzero(m)
        mu = 1.0 / kap[idx]
        lam = data.X[idx] + mu[:, None] * LG[idx]
        G, grad, hess, _ = critical_quantities(data.X[idx], data.Xu[idx], data.Xt[idx], data.Xuu[idx],
                                               data.g[idx], lam)
        scales = _scales(data.X[idx] - lam, data.Xu[idx], data.g[idx])
        _, degen = classify_critical(G, grad, det(hess), scales, ws.tol["critical"])
        out.append((idx, b, kap[idx], mu, lam, degen))
    return out


def lightlike_focal_points(ws, u, t, sign):
    """Focal points over one sample, one per principal curvature with |kappa| above threshold."""
    check_sign(sign)
    data = sheet_data(ws, u, t, frame_derivatives=False)
    if data.X.shape[0] != 1:
        raise ValidationError("lightlike_focal_points takes a single point; use br_caustic for grids")
    if not data.ok[0]:
        ws.frame_at(u, t)
    pts = []
    for idx, b, kap, mu, lam, degen in _focal_arrays(ws, data, sign):
        for j in range(idx.size):
            if not degen[j]:
                raise NumericalFailure(f"focal point at mu={mu[j]:.6g} (kappa={kap[j]:.6g}) is not a "
                                       f"degenerate critical point of the distance-squared function")
            pts.append(FocalPoint(lam=lam[j], t=float(data.t[0]), u=tuple(float(x[0]) for x in data.u),
                                  sign=sign, branch=b, kappa=float(kap[j]), mu=float(mu[j])))
    return pts


@dataclass
class CausticCloud:
    lam: np.ndarray      # (m, n+1)
    t: np.ndarray
    u: np.ndarray        # (m, n-1)
    sign: np.ndarray     # (m,) of '+' / '-'
    branch: np.ndarray
    kappa: np.ndarray
    mu: np.ndarray
    skipped: int = 0
    rejected: int = 0
    metadata: dict = field(default_factory=dict)

    def __len__(self):
        return int(self.t.size)

    @property
    def points(self):
        return [FocalPoint(lam=self.lam[i], t=float(self.t[i]), u=tuple(self.u[i]), sign=str(self.sign[i]),
                           branch=int(self.branch[i]), kappa=float(self.kappa[i]), mu=float(self.mu[i]))
                for i in range(len(self))]

    def select(self, mask):
        return CausticCloud(self.lam[mask], self.t[mask], self.u[mask], self.sign[mask], self.branch[mask],
                            self.kappa[mask], self.mu[mask], self.skipped, self.rejected, dict(self.metadata))


def br_caustic(ws, counts=None, signs=None):
    """Union of the momentary focal sets over the sample grid.

    Ordering: sign, then grid index (row-major over u..., t), then branch.
    Samples with an invalid frame are skipped and counted; focal points the
    distance-squared oracle does not confirm are dropped and counted.
    """
    signs = ws.scene.signs if signs is None else tuple(signs)
    for s in signs:
        check_sign(s)
    us, t = ws.grid(counts)
    dim, k = ws.dim, ws.n - 1
    meta = {"scene": ws.scene.digest(), "grid": tuple(t.shape), "signs": signs}
    if not signs:
        return CausticCloud(np.zeros((0, dim)), np.zeros(0), np.zeros((0, k)), np.zeros(0, dtype="<U1"),
                            np.zeros(0, dtype=int), np.zeros(0), np.zeros(0), metadata=meta)
    data = sheet_data(ws, us, t, frame_derivatives=False)
    U = np.stack(data.u, axis=-1)
    parts, rejected = [], 0
    for s in signs:
        for idx, b, kap, mu, lam, degen in _focal_arrays(ws, data, s):
            rejected += int((~degen).sum())
            idx, kap, mu, lam = idx[degen], kap[degen], mu[degen], lam[degen]
            parts.append((s, idx, b, kap, mu, lam))
    order_key = []
    cols = {k_: [] for k_ in ("lam", "t", "u", "sign", "branch", "kappa", "mu")}
    for si, (s, idx, b, kap, mu, lam) in enumerate(parts):
        cols["lam"].append(lam)
        cols["t"].append(data.t[idx])
        cols["u"].append(U[idx])
        cols["sign"].append(np.full(idx.size, s))
        cols["branch"].append(np.full(idx.size, b))
        cols["kappa"].append(kap)
        cols["mu"].append(mu)
        order_key.append(np.stack([np.full(idx.size, signs.index(s)), idx, np.full(idx.size, b)], axis=-1))
    cols = {k_: np.concatenate(v) for k_, v in cols.items()}
    key = np.concatenate(order_key)
    order = np.lexsort((key[:, 2], key[:, 1], key[:, 0]))
    cols = {k_: v[order] for k_, v in cols.items()}
    return CausticCloud(skipped=int((~data.ok).sum()), rejected=rejected, metadata=meta, **cols)


def unfolded_focal(ws, counts=None, signs=None):
    """Focal points with their time parameter kept: rows (x0, ..., xn, t)."""
    cloud = br_caustic(ws, counts, signs)
    return np.concatenate([cloud.lam, cloud.t[:, None]], axis=1), cloud


# -- Maxwell set ----------------------------------------------------------------

@dataclass
class MaxwellCloud:
    lam: np.ndarray      # (m, 3) coincidence points
    t: np.ndarray        # slice parameter
    s1: np.ndarray
    s2: np.ndarray
    mu1: np.ndarray
    mu2: np.ndarray
    sign1: np.ndarray
    sign2: np.ndarray
    pre_focal: np.ndarray  # both rays still short of their focal points
    capture_radius: float
    dropped: int = 0
    candidates: int = 0

    def __len__(self):
        return int(self.t.size)

    def select(self, mask):
        return MaxwellCloud(self.lam[mask], self.t[mask], self.s1[mask], self.s2[mask], self.mu1[mask],
                            self.mu2[mask], self.sign1[mask], self.sign2[mask], self.pre_focal[mask],
                            self.capture_radius, self.dropped, self.candidates)


class _Front:
    """Sampled momentary fronts (both signs) of one world sheet with n = 2."""

    def __init__(self, ws, s_count, mu_count, signs):
        self.ws = ws
        self.a, self.b = ws.scene.u_domain[0]
        self.periodic = ws.periodic[0]
        self.s = ws.axes((s_count, 2))[0]
        self.mu = np.linspace(*ws.scene.mu_range, mu_count)
        self.signs = signs
        self.ds = (self.b - self.a) / s_count if self.periodic else self.s[1] - self.s[0]
        self.dmu = self.mu[1] - self.mu[0]

    def sample(self, t):
        """Points (m, 3) and parameters (s, mu, sign) of the front at time t."""
        ws = self.ws
        data = sheet_data(ws, [self.s], np.full(self.s.size, t), frame_derivatives=False)
        pts, S, M, SG = [], [], [], []
        for sg in self.signs:
            LG = data.LG(sg)
            p = data.X[:, None, :] + self.mu[None, :, None] * LG[:, None, :]
            ok = np.broadcast_to(data.ok[:, None], p.shape[:2])
            pts.append(p[ok])
            S.append(np.broadcast_to(self.s[:, None], ok.shape)[ok])
            M.append(np.broadcast_to(self.mu[None, :], ok.shape)[ok])
            SG.append(np.full(int(ok.sum()), 1.0 if sg == "+" else -1.0))
        return np.concatenate(pts), np.concatenate(S), np.concatenate(M), np.concatenate(SG)

    def spacing(self, t):
        """Typical distance between neighbouring samples (median over the slice)."""
        data = sheet_data(self.ws, [self.s], np.full(self.s.size, t), frame_derivatives=False)
        step_s = np.linalg.norm(data.Xu[:, 0], axis=-1) * self.ds
        step_mu = np.linalg.norm(data.LG("+"), axis=-1) * self.dmu
        return float(max(np.nanmedian(step_s), np.nanmedian(step_mu)))

    def s_dist(self, s1, s2):
        d = np.abs(s1 - s2)
        if self.periodic:
            L = self.b - self.a
            d = np.minimum(np.mod(d, L), L - np.mod(d, L))
        return d

    def near(self, s1, m1, g1, s2, m2, g2, k=3.0):
        """Pairs that are neighbours on the front itself rather than a crossing."""
        ds = self.s_dist(s1, s2) / self.ds
        same = g1 == g2
        dmu = np.where(same, np.abs(m1 - m2), np.abs(m1) + np.abs(m2)) / self.dmu
        return (ds <= k) & (dmu <= k)


def _pairs(points, radius):
    tree = cKDTree(points)
    pairs = tree.query_pairs(radius, p=np.inf, output_type="ndarray")
    return pairs


def _best_per_key(key, i, j, spread):
    """For every distinct key keep the pair with the largest ``spread`` (0 <= spread < 1)."""
    order = np.argsort(key + 0.5 * (1.0 - spread))
    key_sorted = key[order]
    first = np.ones(order.size, dtype=bool)
    first[1:] = key_sorted[1:] != key_sorted[:-1]
    pick = order[first]
    return i[pick], j[pick]


def _newton(front, t, s1, m1, g1, s2, m2, g2, max_iter=40):
    """Solve LH(s1, m1, g1) = LH(s2, m2, g2) for (m1, s2, m2), s1 fixed."""
    ws = front.ws
    lo, hi = ws.scene.mu_range
    s2 = s2.copy()
    m1, m2 = m1.copy(), m2.copy()
    alive = np.ones(s1.size, dtype=bool)
    conv = np.zeros(s1.size, dtype=bool)
    d1 = sheet_data(ws, [s1], t, frame_derivatives=False)
    LG1 = d1.nT + g1[:, None] * d1.nS
    for _ in range(max_iter):
        if not np.any(alive & ~conv):
            break
        d2 = sheet_data(ws, [front_wrap(front, s2)], t)
        LG2 = d2.nT + g2[:, None] * d2.nS
        LG2s = d2.nTu[:, 0] + g2[:, None] * d2.nSu[:, 0]
        F = (d1.X + m1[:, None] * LG1) - (d2.X + m2[:, None] * LG2)
        scale = np.maximum(1.0, np.max(np.abs(d1.X + m1[:, None] * LG1), axis=-1))
        conv = alive & (np.max(np.abs(F), axis=-1) <= 1e-11 * scale)
        J = np.stack([LG1, -(d2.Xu[:, 0] + m2[:, None] * LG2s), -LG2], axis=-1)
        # damped Gauss-Newton: stays defined where the coincidence is degenerate (conical fronts)
        JT = np.swapaxes(J, -1, -2)
        A = JT @ J
        damp = 1e-12 * np.trace(A, axis1=-2, axis2=-1) + 1e-300
        with np.errstate(all="ignore"):
            step = np.linalg.solve(A + damp[:, None, None] * np.eye(3), np.einsum("nji,nj->ni", J, F)[..., None])[..., 0]
        step = np.where(np.isfinite(step), step, 0.0)
        upd = alive & ~conv
        m1 = np.where(upd, m1 - step[:, 0], m1)
        s2 = np.where(upd, s2 - step[:, 1], s2)
        m2 = np.where(upd, m2 - step[:, 2], m2)
        alive &= (m1 >= lo) & (m1 <= hi) & (m2 >= lo) & (m2 <= hi) & np.all(np.isfinite(F), axis=-1)
        if not front.periodic:
            alive &= (s2 >= front.a) & (s2 <= front.b)
    d2 = sheet_data(ws, [front_wrap(front, s2)], t, frame_derivatives=False)
    LG2 = d2.nT + g2[:, None] * d2.nS
    lam1 = d1.X + m1[:, None] * LG1
    F = lam1 - (d2.X + m2[:, None] * LG2)
    scale = np.maximum(1.0, np.max(np.abs(lam1), axis=-1))
    conv = alive & (np.max(np.abs(F), axis=-1) <= 1e-9 * scale)
    return conv, lam1, front_wrap(front, s2), m1, m2


def front_wrap(front, s):
    if front.periodic:
        return front.a + np.mod(s - front.a, front.b - front.a)
    return np.clip(s, front.a, front.b)


def _pre_focal(ws, s, t, mu, g):
    """True where the ray X(s) + m LG has not yet reached its focal point (mu kappa < 1)."""
    data = sheet_data(ws, [s], t, frame_derivatives=False)
    out = np.zeros(s.size, dtype=bool)
    for sg, val in (("+", 1.0), ("-", -1.0)):
        kap, _, _ = curvatures_on(data, sg)
        m = g == val
        out[m] = mu[m] * kap[m, 0] < 1.0
    return out


def maxwell_candidates(front, t, radius):
    """Coarse coincidence pairs of one slice: (pairs i<j, points, params)."""
    pts, S, M, G = front.sample(t)
    pairs = _pairs(pts, radius)
    if pairs.size == 0:
        return pairs.reshape(0, 2), pts, S, M, G
    i, j = pairs[:, 0], pairs[:, 1]
    keep = ~front.near(S[i], M[i], G[i], S[j], M[j], G[j])
    return pairs[keep], pts, S, M, G


def maxwell_set(ws, counts=None, mu_count=None, signs=("+", "-")):
    """Approximate self-intersections of the momentary fronts, slice by slice.

    Every slice samples LH over (s, mu, sign), finds sample pairs closer than
    the capture radius (twice the sample spacing) that are not neighbours on
    the front, keeps the closest partner per sample and refines it by Newton
    iteration with s1 fixed.  Candidates that fail to converge are counted in
    ``dropped``.
    """
    require_curve_sheet(ws)
    counts = tuple(counts or ws.scene.grid)
    s_count, t_count = counts
    ts = ws.axes(counts)[1]
    lo, hi = ws.scene.mu_range
    if mu_count is None:
        mid = sheet_data(ws, [ws.axes(counts)[0]], np.full(s_count, ts[len(ts) // 2]), frame_derivatives=False)
        ds = np.nanmedian(np.linalg.norm(mid.Xu[:, 0], axis=-1)) * (ws.scene.u_domain[0][1] - ws.scene.u_domain[0][0]) / s_count
        mu_count = int(np.clip(np.ceil((hi - lo) / max(ds, 1e-12)) + 1, 20, 1000))
    front = _Front(ws, s_count, mu_count, signs)
    out = {k: [] for k in ("lam", "t", "s1", "s2", "mu1", "mu2", "g1", "g2")}
    dropped = total = 0
    radius = 0.0
    for t in ts:
        r = 2.0 * front.spacing(t)
        radius = max(radius, r)
        pairs, pts, S, M, G = maxwell_candidates(front, t, r)
        if pairs.size == 0:
            continue
        i, j = pairs[:, 0], pairs[:, 1]
        # Newton fixes s1, so one seed per ray and stretch of mu is enough: bin by (s, sign, mu // 8 steps)
        i, j = np.concatenate([i, j]), np.concatenate([j, i])
        s_idx = np.rint((S[i] - front.a) / front.ds).astype(np.int64)
        mu_bin = np.floor((M[i] - lo) / (8 * front.dmu)).astype(np.int64)
        key = (s_idx * 2 + (G[i] > 0)) * (mu_count // 8 + 2) + mu_bin
        # prefer partners far away along the front: close ones tend to fold onto the caustic
        spread = front.s_dist(S[i], S[j]) / (front.b - front.a)
        i, j = _best_per_key(key.astype(float), i, j, np.minimum(spread, 0.999))
        total += i.size
        tt = np.full(i.size, t)
        conv, lam, s2, m1, m2 = _newton(front, tt, S[i], M[i], G[i], S[j], M[j], G[j])
        conv &= ~front.near(S[i], m1, G[i], s2, m2, G[j], k=0.5)
        dropped += int((~conv).sum())
        for key, val in (("lam", lam), ("t", tt), ("s1", S[i]), ("s2", s2), ("mu1", m1), ("mu2", m2),
                         ("g1", G[i]), ("g2", G[j])):
            out[key].append(val[conv])
    if not out["t"]:
        z = np.zeros(0)
        return MaxwellCloud(np.zeros((0, 3)), z, z, z, z, z, np.zeros(0, dtype="<U1"), np.zeros(0, dtype="<U1"),
                            np.zeros(0, dtype=bool), radius, dropped, total)
    o = {k: np.concatenate(v) for k, v in out.items()}
    pre = _pre_focal(ws, o["s1"], o["t"], o["mu1"], o["g1"]) & _pre_focal(ws, o["s2"], o["t"], o["mu2"], o["g2"])
    to_sign = lambda g: np.where(g > 0, "+", "-")
    return MaxwellCloud(o["lam"], o["t"], o["s1"], o["s2"], o["mu1"], o["mu2"], to_sign(o["g1"]),
                        to_sign(o["g2"]), pre, radius, dropped, total)


def maxwell_bruteforce(ws, counts, signs=("+", "-"), exclude=3):
    """O(N^2) reference for the Maxwell set: pairs of light rays that meet.

    For every pair of sampled rays X(s_i) + mu LG(s_i) and X(s_j) + mu LG(s_j)
    the signed distance between the two lines is tabulated; a sign change
    along s_j brackets a pair of intersecting rays.  The crossing is located
    by linear interpolation of the bracket, and kept when the closest
    approach is within half the capture radius with both mu in range.  Pairs
    within ``exclude`` samples of each other (same sign) are skipped: nearby
    rays meet on the caustic, not on the Maxwell set.

    Shares no code with :func:`maxwell_set` beyond sheet evaluation.
    """
    require_curve_sheet(ws)
    s_count = counts[0]
    lo, hi = ws.scene.mu_range
    su = ws.axes(counts)[0]
    a, b = ws.scene.u_domain[0]
    periodic = ws.periodic[0]
    ds = (b - a) / s_count if periodic else su[1] - su[0]
    out = {k: [] for k in ("lam", "t", "s1", "s2", "mu1", "mu2", "g1", "g2")}
    radius = 0.0
    for t in ws.axes(counts)[1]:
        data = sheet_data(ws, [su], np.full(su.size, t), frame_derivatives=False)
        radius = max(radius, 2.0 * float(np.nanmedian(np.linalg.norm(data.Xu[:, 0], axis=-1))) * ds)
        for sg1 in signs:
            for sg2 in signs:
                P, L1, L2 = data.X, data.LG(sg1), data.LG(sg2)
                n = np.cross(L1[:, None, :], L2[None, :, :])
                nn = np.linalg.norm(n, axis=-1)
                with np.errstate(all="ignore"):
                    D = np.einsum("ijd,ijd->ij", P[None, :, :] - P[:, None, :], n) / nn
                idx = np.arange(su.size)
                diff = np.abs(idx[:, None] - idx[None, :])
                if periodic:
                    diff = np.minimum(diff, su.size - diff)
                valid = np.isfinite(D) & (diff > exclude)
                if periodic:
                    jn = (idx + 1) % su.size
                else:
                    jn = np.minimum(idx + 1, su.size - 1)
                D2 = D[:, jn]
                br = valid & valid[:, jn] & (D * D2 <= 0) & (D != D2)
                if not periodic:
                    br[:, -1] = False
                ii, jj = np.nonzero(br)
                if ii.size == 0:
                    continue
                w = D[ii, jj] / (D[ii, jj] - D2[ii, jj])
                s2 = su[jj] + w * ds
                d2 = sheet_data(ws, [front_wrap_s(a, b, periodic, s2)], np.full(s2.size, t), frame_derivatives=False)
                P1, V1 = data.X[ii], L1[ii]
                P2, V2 = d2.X, d2.LG(sg2)
                # closest approach of the two lines
                A = np.stack([V1, -V2], axis=-1)
                rhs = P2 - P1
                ata = np.swapaxes(A, -1, -2) @ A
                with np.errstate(all="ignore"):
                    m = np.linalg.solve(ata + 1e-300 * np.eye(2), (np.swapaxes(A, -1, -2) @ rhs[..., None]))[..., 0]
                q1 = P1 + m[:, :1] * V1
                q2 = P2 + m[:, 1:] * V2
                gap = np.max(np.abs(q1 - q2), axis=-1)
                keep = (np.isfinite(gap) & (gap <= 0.5 * radius) & (m[:, 0] >= lo) & (m[:, 0] <= hi)
                        & (m[:, 1] >= lo) & (m[:, 1] <= hi))
                g1v = 1.0 if sg1 == "+" else -1.0
                g2v = 1.0 if sg2 == "+" else -1.0
                for key, val in (("lam", 0.5 * (q1 + q2)), ("t", np.full(ii.size, t)), ("s1", su[ii]), ("s2", s2),
                                 ("mu1", m[:, 0]), ("mu2", m[:, 1]), ("g1", np.full(ii.size, g1v)),
                                 ("g2", np.full(ii.size, g2v))):
                    out[key].append(val[keep])
    if not out["t"]:
        z = np.zeros(0)
        return MaxwellCloud(np.zeros((0, 3)), z, z, z, z, z, np.zeros(0, dtype="<U1"), np.zeros(0, dtype="<U1"),
                            np.zeros(0, dtype=bool), radius)
    o = {k: np.concatenate(v) for k, v in out.items()}
    pre = _pre_focal(ws, o["s1"], o["t"], o["mu1"], o["g1"]) & _pre_focal(ws, o["s2"], o["t"], o["mu2"], o["g2"])
    to_sign = lambda g: np.where(g > 0, "+", "-")
    return MaxwellCloud(o["lam"], o["t"], o["s1"], o["s2"], o["mu1"], o["mu2"], to_sign(o["g1"]),
                        to_sign(o["g2"]), pre, radius, 0, int(o["t"].size))


def front_wrap_s(a, b, periodic, s):
    if periodic:
        return a + np.mod(s - a, b - a)
    return np.clip(s, a, b)
