"""World sheets: embedding evaluation, derivative jets and momentary frames.

The frame at a point consists of the tangents X_{u_i}, X_t, the metric
g_ij = <X_{u_i}, X_{u_j}> of the momentary space, the unit spacelike normal
nS of the sheet and the future-pointing unit timelike normal nT of the
momentary space inside the sheet.

:func:`build_frame` is written with ring operations only, so the same code
runs on plain arrays (one frame per grid point) and on jets (the frame as a
field, ready to be differentiated).
"""

from dataclasses import dataclass, field

import numpy as np

from . import jets as _jets
from .errors import DomainError, NotImmersed, NotSpacelike, NotTimelike, ValidationError
from .expression import eval_jet, evaluate, fd_jet
from .linalg import cholesky, laplace_det, solve_generic
from .minkowski import pseudo_dot


# -- ring-generic vector helpers (arrays or jets, components on the last axis)

def _sig(dim):
    s = np.ones(dim)
    s[0] = -1.0
    return s


def rdot(x, y):
    """Pseudo scalar product that also accepts jets."""
    if isinstance(x, _jets.Jet) or isinstance(y, _jets.Jet):
        dim = (x if isinstance(x, _jets.Jet) else np.asarray(x)).shape[-1]
        return (x * y * _sig(dim)).sum(-1)
    return pseudo_dot(x, y)


def _expand(s):
    """Scalar field -> broadcastable against vectors."""
    if isinstance(s, _jets.Jet):
        return s[..., None]
    return np.asarray(s)[..., None]


def _stack(parts):
    if any(isinstance(p, _jets.Jet) for p in parts):
        return _jets.stack(parts, axis=-1)
    return np.stack(parts, axis=-1)


def rwedge(vectors):
    """Wedge product by first-row expansion; accepts jets."""
    dim = len(vectors) + 1
    comps = [[v[..., k] for k in range(dim)] for v in vectors]
    out = []
    for j in range(dim):
        minor = [row[:j] + row[j + 1:] for row in comps]
        d = laplace_det(minor)
        out.append(d if j % 2 == 0 else -d)
    out[0] = -out[0]
    return _stack(out)


def _value(x):
    return x.value if isinstance(x, _jets.Jet) else np.asarray(x)


# -- frames -------------------------------------------------------------------

@dataclass
class FrameField:
    """Frames over a batch of points; invalid points carry NaNs and a False flag."""
    X: np.ndarray
    Xu: list
    Xt: object
    g: object            # (n-1) x (n-1) nested list of scalar fields
    nS: object
    nT: object
    immersed: np.ndarray = None
    spacelike: np.ndarray = None
    timelike: np.ndarray = None
    immersion_margin: np.ndarray = None
    min_g_eig: np.ndarray = None

    @property
    def ok(self):
        return self.immersed & self.spacelike & self.timelike

    def g_matrix(self):
        g = self.g
        return np.stack([np.stack([_value(x) for x in row], axis=-1) for row in g], axis=-2)

    def LG(self, sign):
        return self.nT + self.nS if sign == "+" else self.nT - self.nS


def build_frame(X, Xu, Xt, tol_immersion=1e-8, tol_causal=1e-9, safe=True):
    """Momentary frame from tangents.

    ``Xu`` is a list of the n-1 spatial tangents, ``Xt`` the time tangent.  With
    ``safe`` the validity flags are computed and invalid points get NaNs; with
    ``safe=False`` (used on jets) every point is assumed valid.
    """
    if safe:
        with np.errstate(all="ignore"):
            return _build_frame(X, Xu, Xt, tol_immersion, tol_causal, safe)
    return _build_frame(X, Xu, Xt, tol_immersion, tol_causal, safe)


def _build_frame(X, Xu, Xt, tol_immersion, tol_causal, safe):
    k = len(Xu)
    g = [[rdot(Xu[i], Xu[j]) for j in range(k)] for i in range(k)]
    W = rwedge(list(Xu) + [Xt])
    b = [rdot(Xt, Xu[i]) for i in range(k)]
    c = solve_generic(g, b) if k else []
    w = Xt
    for i in range(k):
        w = w - _expand(c[i]) * Xu[i]
    WW = rdot(W, W)
    ww = rdot(w, w)

    if not safe:
        nS = W * _expand(WW.sqrt().reciprocal())
        sgn = np.sign(_value(w)[..., 0])
        nT = w * _expand((-ww).sqrt().reciprocal()) * sgn[..., None]
        return FrameField(X, list(Xu), Xt, g, nS, nT)

    Wv, wv = np.asarray(W), np.asarray(w)
    tang = np.prod([np.linalg.norm(v, axis=-1) for v in list(Xu) + [Xt]], axis=0)
    margin = np.linalg.norm(Wv, axis=-1) / np.where(tang > 0, tang, 1.0)
    margin = np.where(tang > 0, margin, 0.0)
    immersed = margin > tol_immersion

    gm = np.stack([np.stack(row, axis=-1) for row in g], axis=-2) if k else np.zeros(np.shape(WW) + (0, 0))
    _, spacelike = cholesky(gm)
    min_eig = np.linalg.eigvalsh(gm)[..., 0] if k else np.full(np.shape(WW), np.inf)
    scale_w = np.max(np.abs(wv), axis=-1) ** 2
    timelike = (ww < -tol_causal * scale_w) & spacelike & immersed
    spacelike = spacelike & immersed

    WWs = np.where(WW > 0, WW, 1.0)
    wws = np.where(timelike, -ww, 1.0)
    nS = Wv / np.sqrt(WWs)[..., None]
    nT = wv / np.sqrt(wws)[..., None]
    nT = nT * np.where(nT[..., 0] < 0, -1.0, 1.0)[..., None]
    bad = ~(immersed & spacelike & timelike & (WW > 0))
    nS = np.where(bad[..., None], np.nan, nS)
    nT = np.where(bad[..., None], np.nan, nT)
    return FrameField(X, list(Xu), Xt, g, nS, nT, immersed, spacelike, timelike, margin, min_eig)


@dataclass(frozen=True)
class MomentaryFrame:
    point: np.ndarray
    tangent_u: tuple
    tangent_t: np.ndarray
    g: np.ndarray
    nS: np.ndarray
    nT: np.ndarray
    ok: dict = field(default_factory=dict)

    def LG(self, sign):
        return self.nT + self.nS if sign == "+" else self.nT - self.nS


# -- the world sheet ----------------------------------------------------------

class WorldSheet:
    """A scene's embedding (u_1..u_{n-1}, t) -> R^{n+1}_1 with derivative access."""

    def __init__(self, scene):
        self.scene = scene
        self.dim = scene.dim
        self.n = scene.dim - 1
        self.u_names = scene.u_names
        self.params = scene.param_names
        self.periodic = self._detect_periodic()

    @property
    def tol(self):
        return self.scene.tolerances

    # parameters -------------------------------------------------------------

    def split_u(self, u):
        """Normalize ``u`` to a list of n-1 arrays (a bare value is allowed when n = 2)."""
        if self.n == 2 and (np.isscalar(u) or (isinstance(u, np.ndarray) and u.ndim == 0)):
            return [np.asarray(u, dtype=float)]
        if self.n == 2 and isinstance(u, np.ndarray):
            return [u.astype(float)]
        u = list(u)
        if len(u) != self.n - 1:
            raise ValidationError(f"expected {self.n - 1} u-parameters, got {len(u)}", "u")
        return [np.asarray(x, dtype=float) for x in u]

    def _point(self, u, t, check=True):
        us = self.split_u(u)
        t = np.asarray(t, dtype=float)
        for i, ((a, b), x) in enumerate(zip(self.scene.u_domain, us)):
            if self.periodic[i]:
                us[i] = a + np.mod(x - a, b - a)
                # keep the exact right endpoint
                us[i] = np.where(np.isclose(x, b, rtol=0, atol=1e-14), x, us[i])
            elif check and np.any((x < a - 1e-12 * (b - a)) | (x > b + 1e-12 * (b - a))):
                raise DomainError(f"{self.u_names[i]} outside [{a}, {b}]")
        a, b = self.scene.t_domain
        if check and np.any((t < a - 1e-12 * (b - a)) | (t > b + 1e-12 * (b - a))):
            raise DomainError(f"t outside [{a}, {b}]")
        pt = {name: x for name, x in zip(self.u_names, us)}
        pt["t"] = t
        return pt

    def _detect_periodic(self):
        flags = []
        ta, tb = self.scene.t_domain
        ts = np.linspace(ta, tb, 5)
        for i, (a, b) in enumerate(self.scene.u_domain):
            mids = [0.5 * (c + d) for c, d in self.scene.u_domain]
            lo, hi = list(mids), list(mids)
            lo[i], hi[i] = a, b
            pt_lo = {n: np.full(5, v) for n, v in zip(self.u_names, lo)}
            pt_hi = {n: np.full(5, v) for n, v in zip(self.u_names, hi)}
            pt_lo["t"] = pt_hi["t"] = ts
            try:
                xa = np.stack([np.broadcast_to(evaluate(e, pt_lo), (5,)) for e in self.scene.embedding], -1)
                xb = np.stack([np.broadcast_to(evaluate(e, pt_hi), (5,)) for e in self.scene.embedding], -1)
            except DomainError:
                flags.append(False)
                continue
            scale = max(1.0, float(np.max(np.abs(xa))))
            flags.append(bool(np.max(np.abs(xa - xb)) <= 1e-10 * scale))
        return tuple(flags)

    def axes(self, counts=None):
        """Sample coordinates per parameter; periodic axes drop the duplicate endpoint."""
        counts = tuple(counts or self.scene.grid)
        out = []
        for i, (a, b) in enumerate(self.scene.u_domain):
            if self.periodic[i]:
                out.append(a + (b - a) * np.arange(counts[i]) / counts[i])
            else:
                out.append(np.linspace(a, b, counts[i]))
        out.append(np.linspace(*self.scene.t_domain, counts[-1]))
        return out

    def grid(self, counts=None):
        """Meshgrid (u list, t) with indexing 'ij', shape = counts."""
        mesh = np.meshgrid(*self.axes(counts), indexing="ij")
        return mesh[:-1], mesh[-1]

    # evaluation ---------------------------------------------------------------

    def embed(self, u, t):
        pt = self._point(u, t)
        shape = np.broadcast_shapes(*[np.shape(v) for v in pt.values()])
        return np.stack([np.broadcast_to(evaluate(e, pt), shape).astype(float)
                         for e in self.scene.embedding], axis=-1)

    def jet(self, u, t, order, directions=None, mode=None, step=None):
        """Jet of X at (u, t) with components on the last batch axis."""
        pt = self._point(u, t)
        directions = tuple(directions or self.params)
        mode = mode or self.scene.diff_mode
        if mode == "jets":
            comps = [eval_jet(e, pt, order, directions) for e in self.scene.embedding]
        else:
            h = self.scene.fd_step if step is None else step
            comps = [fd_jet(e, pt, order, directions, h) for e in self.scene.embedding]
        return _jets.stack(comps, axis=-1)

    def derivatives(self, u, t, order=2):
        """Dict of plain derivative arrays keyed by parameter-name tuples, e.g. ('u1', 't')."""
        j = self.jet(u, t, order)
        out = {}
        for alpha in j.space.monomials:
            key = tuple(name for name, k in zip(self.params, alpha) for _ in range(k))
            out[key] = j.derivative(alpha)
        return out

    def frames(self, u, t):
        """Batched momentary frames over broadcast (u, t)."""
        d = self.derivatives(u, t, order=1)
        Xu = [d[(name,)] for name in self.u_names]
        return build_frame(d[()], Xu, d[("t",)], self.tol["immersion"], self.tol["causal"])

    def frame_jet(self, u, t, order=1):
        """The frame as a field: jets of nS and nT of the given order at valid points."""
        j = self.jet(u, t, order + 1)
        Xu = [j.deriv(name) for name in self.u_names]
        return build_frame(j, Xu, j.deriv("t"), safe=False)

    def frame_at(self, u, t):
        """Frame at a single point; raises a FrameError subclass when it does not exist."""
        f = self.frames(u, t)
        if f.X.ndim != 1:
            raise ValidationError("frame_at takes a single point; use frames() for batches")
        if not f.immersed:
            raise NotImmersed(f"tangent vectors are linearly dependent at u={u}, t={t}")
        if not f.spacelike:
            raise NotSpacelike(f"momentary space is not spacelike at u={u}, t={t}")
        if not f.timelike:
            raise NotTimelike(f"X_t has no timelike component normal to the momentary space at u={u}, t={t}")
        return MomentaryFrame(point=f.X, tangent_u=tuple(f.Xu), tangent_t=f.Xt, g=f.g_matrix(),
                              nS=f.nS, nT=f.nT,
                              ok={"immersed": True, "spacelike": True, "timelike": True})


def require_curve_sheet(ws):
    if ws.n != 2:
        raise ValidationError(f"this operation needs a world sheet in 3-dimensional space-time, got dim {ws.dim}", "dim")


# -- validation report --------------------------------------------------------

@dataclass
class ValidationReport:
    samples: int
    min_g_eigenvalue: float
    min_immersion_margin: float
    failures: dict
    worst_point: tuple
    frame_residual: float

    @property
    def passed(self):
        return not any(self.failures.values())

    def rows(self):
        yield ("samples", str(self.samples), "")
        yield ("min eigenvalue of g", f"{self.min_g_eigenvalue:.6g}",
               "FAIL" if self.failures["spacelike"] else "ok")
        yield ("min immersion margin", f"{self.min_immersion_margin:.6g}",
               "FAIL" if self.failures["immersed"] else "ok")
        yield ("timelike tangent planes", f"{self.samples - self.failures['timelike']}/{self.samples}",
               "FAIL" if self.failures["timelike"] else "ok")
        yield ("max frame residual", f"{self.frame_residual:.3g}",
               "FAIL" if self.failures["frame"] else "ok")
        yield ("worst point (u..., t)", ", ".join(f"{x:.6g}" for x in self.worst_point), "")


def frame_residual(f):
    """Largest violation of the orthonormality relations of a frame batch."""
    res = [np.abs(rdot(f.nS, f.nS) - 1), np.abs(rdot(f.nT, f.nT) + 1), np.abs(rdot(f.nS, f.nT))]
    for xu in f.Xu:
        scale = np.maximum(1.0, np.max(np.abs(xu), axis=-1))
        res.append(np.abs(rdot(f.nS, xu)) / scale)
        res.append(np.abs(rdot(f.nT, xu)) / scale)
    return np.max(np.stack(res, axis=-1), axis=-1)


def validate_worldsheet(ws, counts=None):
    """Check the world-sheet conditions on every grid sample."""
    us, t = ws.grid(counts)
    f = ws.frames(us, t)
    res = frame_residual(f)
    res = np.where(f.ok, res, 0.0)
    failures = {
        "immersed": int(np.sum(~f.immersed)),
        "spacelike": int(np.sum(~f.spacelike)),
        "timelike": int(np.sum(~f.timelike)),
        "frame": int(np.sum(res > ws.tol["frame"])),
    }
    # worst point: first invalid sample, else the one with the smallest g eigenvalue
    badness = np.where(f.ok, -f.min_g_eig, np.inf).ravel()
    idx = np.unravel_index(int(np.argmax(badness)), t.shape)
    worst = tuple(float(x[idx]) for x in us) + (float(t[idx]),)
    return ValidationReport(samples=int(t.size), min_g_eigenvalue=float(np.min(f.min_g_eig)),
                            min_immersion_margin=float(np.min(f.immersion_margin)),
                            failures=failures, worst_point=worst, frame_residual=float(np.max(res)))
