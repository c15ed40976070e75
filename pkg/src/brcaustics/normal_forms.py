"""Local models of light-sheet and caustic singularities.

Two kinds of reference data:

* closed-form surfaces: cuspidal edge, swallowtail, pyramid, purse, and the
  four graph-like wave-front germs of stable world sheets in 3-dimensional
  space-time, evaluated exactly as printed;
* generating families F(q, x0, x1, x2, t) for the five stable germs, from
  which the wave front and caustic are obtained by closed-form elimination.
  Every family is linear in x0 and t, so F = dF/dq = 0 is solved for
  (x0, t), and the caustic is where d x0 / dq vanishes on that branch.

Polynomials are stored as coefficient tables {(a_q, a_0, a_1, a_2, a_t): c}.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

SURFACE_KINDS = ("CE", "SW", "PY", "PU", "WF1", "WF2", "WF3", "WF4")
VARS = ("q", "x0", "x1", "x2", "t")


# -- polynomial tables --------------------------------------------------------

def _poly_eval(terms, q, x0, x1, x2, t):
    vals = (q, x0, x1, x2, t)
    out = 0.0
    for exps, c in terms.items():
        term = c
        for v, e in zip(vals, exps):
            if e:
                term = term * v ** e
        out = out + term
    return out


def _poly_dq(terms):
    out = {}
    for (a, *rest), c in terms.items():
        if a:
            key = (a - 1, *rest)
            out[key] = out.get(key, 0.0) + a * c
    return out


def _split(terms, var):
    """Split a table into (coefficient table of ``var``, remainder); ``var`` must enter linearly."""
    i = VARS.index(var)
    lin, rest = {}, {}
    for exps, c in terms.items():
        if exps[i] > 1:
            raise ValidationError(f"family is not linear in {var}", "family")
        if exps[i] == 1:
            e = list(exps)
            e[i] = 0
            lin[tuple(e)] = lin.get(tuple(e), 0.0) + c
        else:
            rest[exps] = rest.get(exps, 0.0) + c
    return lin, rest


def _mono(q=0, x0=0, x1=0, x2=0, t=0):
    return (q, x0, x1, x2, t)


@dataclass(frozen=True)
class GeneratingFamily:
    """One of the five stable unfoldings.

    form 1: q;  2: +-t +- q^2;  3: +-t + q^3 + x0 q;  4: +-t +- q^4 + x0 q + x1 q^2;
    5: +-t + q^5 + x0 q + x1 q^2 + x2 q^3.
    ``sign_t`` is the sign of t, ``sign_q`` that of the leading q power (forms 2 and 4).
    """
    form_id: int
    sign_t: int = 1
    sign_q: int = 1
    terms: dict = field(default_factory=dict, compare=False)

    @property
    def unfolding(self):
        """Names of the unfolding parameters x_j that appear."""
        return tuple(v for i, v in enumerate(VARS[1:4], start=1) if any(e[i] for e in self.terms))

    def __call__(self, q, x0=0.0, x1=0.0, x2=0.0, t=0.0):
        return _poly_eval(self.terms, q, x0, x1, x2, t)

    def dq(self, q, x0=0.0, x1=0.0, x2=0.0, t=0.0, k=1):
        terms = self.terms
        for _ in range(k):
            terms = _poly_dq(terms)
        return _poly_eval(terms, q, x0, x1, x2, t)


def generating_family(form_id, sign_t=1, sign_q=1):
    if form_id not in (1, 2, 3, 4, 5):
        raise ValidationError(f"form must be 1..5, got {form_id}", "form")
    if sign_t not in (1, -1) or sign_q not in (1, -1):
        raise ValidationError("signs must be +1 or -1", "sign")
    if form_id == 1:
        terms = {_mono(q=1): 1.0}
    elif form_id == 2:
        terms = {_mono(t=1): float(sign_t), _mono(q=2): float(sign_q)}
    elif form_id == 3:
        terms = {_mono(t=1): float(sign_t), _mono(q=3): 1.0, _mono(q=1, x0=1): 1.0}
    elif form_id == 4:
        terms = {_mono(t=1): float(sign_t), _mono(q=4): float(sign_q), _mono(q=1, x0=1): 1.0,
                 _mono(q=2, x1=1): 1.0}
    else:
        terms = {_mono(t=1): float(sign_t), _mono(q=5): 1.0, _mono(q=1, x0=1): 1.0,
                 _mono(q=2, x1=1): 1.0, _mono(q=3, x2=1): 1.0}
    return GeneratingFamily(form_id, sign_t if form_id > 1 else 1, sign_q if form_id in (2, 4) else 1, terms)


# -- critical set, front, caustic ---------------------------------------------

@dataclass
class CriticalBranch:
    """Explicit solution of F = dF/dq = 0, as arrays over the branch parameters."""
    family: GeneratingFamily
    q: np.ndarray
    x0: np.ndarray
    x1: np.ndarray
    x2: np.ndarray
    t: np.ndarray

    @property
    def front(self):
        return np.stack([self.x0, self.x1, self.x2, self.t], axis=-1)


def _q_roots(poly_q):
    """Real roots of a polynomial in q alone, given as a table."""
    deg = max((e[0] for e in poly_q), default=0)
    coeffs = np.zeros(deg + 1)
    for exps, c in poly_q.items():
        if any(exps[1:]):
            raise ValidationError("expected a polynomial in q only", "family")
        coeffs[exps[0]] += c
    if deg == 0:
        return np.array([]) if coeffs[0] != 0 else None
    r = np.roots(coeffs[::-1])
    return np.unique(np.real(r[np.abs(np.imag(r)) < 1e-12]))


def family_critical_set(F, q=None, x1=None, x2=None, x0=None):
    """Sigma_*(F) as an explicit branch.

    When x0 enters F, the branch is parametrized by (q, x1, x2) with
    x0 = -(remaining part of dF/dq) / coefficient and t from F = 0.
    Otherwise dF/dq depends on q only; its real roots are used and
    (x0, x1, x2) are free.  Arrays are broadcast against each other.
    """
    x0_lin, rest = _split(F.terms, "x0")
    t_lin, _ = _split(F.terms, "t")
    ct = t_lin.get(_mono(), 0.0)
    if ct == 0.0 and x0_lin:
        raise ValidationError("family has no t term", "family")
    z = np.zeros(())
    if x0_lin:
        if set(x0_lin) != {_mono(q=1)}:
            raise ValidationError("x0 must enter as x0 q", "family")
        c0 = x0_lin[_mono(q=1)]
        q, x1, x2 = np.broadcast_arrays(*(np.asarray(a if a is not None else z, dtype=float)
                                          for a in (q, x1, x2)))
        x0v = -_poly_eval(_poly_dq(rest), q, 0.0, x1, x2, 0.0) / c0
        tv = -_poly_eval(_split(F.terms, "t")[1], q, x0v, x1, x2, 0.0) / ct
        return CriticalBranch(F, q, x0v, x1, x2, tv)
    roots = _q_roots(_poly_dq(_split(F.terms, "t")[1]))
    if roots is None:
        raise ValidationError("dF/dq vanishes identically", "family")
    x0, x1, x2 = np.broadcast_arrays(*(np.asarray(a if a is not None else z, dtype=float) for a in (x0, x1, x2)))
    if roots.size == 0:
        e = np.zeros((0,))
        return CriticalBranch(F, e, e, e, e, e)
    if ct == 0.0:
        raise ValidationError("family has no t term", "family")
    qs = np.concatenate([np.full(x0.size, r) for r in roots])
    x0s, x1s, x2s = (np.tile(a.ravel(), roots.size) for a in (x0, x1, x2))
    tv = -_poly_eval(_split(F.terms, "t")[1], qs, x0s, x1s, x2s, 0.0) / ct
    return CriticalBranch(F, qs, x0s, x1s, x2s, tv)


def family_front(F, q=None, x1=None, x2=None, x0=None):
    """Graph-like wave front {(x0, x1, x2, t)} over the critical branch, shape (..., 4)."""
    return family_critical_set(F, q=q, x1=x1, x2=x2, x0=x0).front


@dataclass
class CausticBranch:
    q: np.ndarray
    points: np.ndarray      # (..., 3) critical values (x0, x1, x2)
    jacobian_det: np.ndarray  # det of the base projection on the branch, should vanish


def family_caustic(F, q=None, x2=None, x1=None):
    """Critical values of the projection (q, x1, x2) -> (x0(q, x1, x2), x1, x2).

    Its Jacobian is triangular with determinant d x0 / dq, which is linear
    in x1 when x1 enters F; the rank-deficiency locus is then solved for x1
    and parametrized by (q, x2).  Without x1 the locus is {q : d x0/dq = 0}.
    Families without x0 have an invertible projection and an empty caustic.
    """
    x0_lin, rest = _split(F.terms, "x0")
    z = np.zeros(())
    if not x0_lin:
        e = np.zeros((0,))
        return CausticBranch(e, np.zeros((0, 3)), e)
    c0 = x0_lin[_mono(q=1)]
    # x0 = -R_q / c0, so d x0/dq = -R_qq / c0
    Rqq = _poly_dq(_poly_dq(rest))
    x1_lin, Rqq_rest = _split(Rqq, "x1")
    if x1_lin:
        if set(x1_lin) != {_mono()}:
            raise ValidationError("x1 must enter as x1 q^2", "family")
        q, x2 = np.broadcast_arrays(*(np.asarray(a if a is not None else z, dtype=float) for a in (q, x2)))
        x1v = -_poly_eval(Rqq_rest, q, 0.0, 0.0, x2, 0.0) / x1_lin[_mono()]
    else:
        roots = _q_roots(Rqq)
        x1, x2 = np.broadcast_arrays(*(np.asarray(a if a is not None else z, dtype=float) for a in (x1, x2)))
        roots = np.zeros((0,)) if roots is None else roots
        q = np.concatenate([np.full(x1.size, r) for r in roots]) if roots.size else np.zeros((0,))
        x1v = np.tile(x1.ravel(), roots.size)
        x2 = np.tile(x2.ravel(), roots.size)
    br = family_critical_set(F, q=q, x1=x1v, x2=x2)
    det = -_poly_eval(Rqq, br.q, 0.0, br.x1, br.x2, 0.0) / c0
    return CausticBranch(br.q, np.stack([br.x0, br.x1, br.x2], axis=-1), det)


def psi(points):
    """The linear map (x0, x1, x2) -> (-x0/5, -2 x1/5, 3 x2/5)."""
    p = np.asarray(points, dtype=float)
    return np.stack([-p[..., 0] / 5, -2 * p[..., 1] / 5, 3 * p[..., 2] / 5], axis=-1)


def sw_parameters(u, w):
    """(U, V) = (u, 3w/5) relating the form-5 caustic parameters to the swallowtail's."""
    return np.asarray(u, dtype=float), 0.6 * np.asarray(w, dtype=float)


# -- closed-form surfaces -----------------------------------------------------

@dataclass
class NormalSurface:
    kind: str
    params: dict
    points: np.ndarray


def _grid(grid):
    if len(grid) < 2:
        raise ValidationError("grid needs at least two parameter axes", "grid")
    axes = [np.asarray(a, dtype=float).ravel() for a in grid]
    if any(a.size == 0 for a in axes):
        raise ValidationError("grid must be nonempty", "grid")
    return np.meshgrid(*axes, indexing="ij")


def normal_form_surface(kind, grid, sign=1):
    """Evaluate a reference parametrization on a tensor grid.

    CE, SW: grid (u, v).  PY (w^2 = u^2 + v^2) and PU (w^2 = 36 uv): grid
    (u, v); both roots w are emitted and (u, v) with no real w are dropped.
    WF1..WF4: the four graph-like wave-front germs, grid (u, v, w), points
    in R^3 x R; ``sign`` picks the +- in the t component (and, for WF3,
    the paired sign of the cubic term).  They are evaluated exactly as
    printed; :func:`family_front` gives the eliminated versions.
    """
    kind = kind.upper()
    if kind not in SURFACE_KINDS:
        raise ValidationError(f"unknown surface kind {kind!r}; expected one of {', '.join(SURFACE_KINDS)}", "kind")
    if sign not in (1, -1):
        raise ValidationError("sign must be +1 or -1", "sign")
    if kind in ("CE", "SW"):
        u, v = _grid(grid[:2])
        if kind == "CE":
            pts = np.stack([u, v ** 2, v ** 3], axis=-1)
        else:
            pts = np.stack([3 * u ** 4 + u ** 2 * v, 4 * u ** 3 + 2 * u * v, v], axis=-1)
        return NormalSurface(kind, {"u": u, "v": v}, pts.reshape(-1, 3))
    if kind in ("PY", "PU"):
        u, v = (a.ravel() for a in _grid(grid[:2]))
        w2 = u ** 2 + v ** 2 if kind == "PY" else 36 * u * v
        keep = w2 >= 0
        u, v = u[keep], v[keep]
        r = np.sqrt(w2[keep])
        u, v, w = np.concatenate([u, u]), np.concatenate([v, v]), np.concatenate([r, -r])
        if kind == "PY":
            pts = np.stack([u ** 2 - v ** 2 + 2 * u * v, -2 * u * v + 2 * u * w, w], axis=-1)
        else:
            pts = np.stack([3 * u ** 2 + w * v, 3 * v ** 2 + w * u, w], axis=-1)
        return NormalSurface(kind, {"u": u, "v": v, "w": w}, pts)
    if len(grid) < 3:
        raise ValidationError("wave-front germs need a (u, v, w) grid", "grid")
    u, v, w = _grid(grid[:3])
    s = float(sign)
    if kind == "WF1":
        cols = [u, v, w, np.zeros_like(u)]
    elif kind == "WF2":
        cols = [-u ** 2, v, w, s * 2 * u ** 3]
    elif kind == "WF3":
        cols = [-s * 4 * u ** 3 - 2 * v * u, v, w, 3 * u ** 3 + s * v * u ** 2]
    else:
        cols = [5 * u ** 4 + 2 * v * u + 3 * w * u ** 2, v, w, s * (4 * u ** 4 + v * u ** 2 + 2 * w * u ** 3)]
    return NormalSurface(kind, {"u": u, "v": v, "w": w}, np.stack(cols, axis=-1).reshape(-1, 4))


# -- germ type ----------------------------------------------------------------

def germ_type(jet, tol=1e-9):
    """A_k type of a one-variable germ from its derivatives (f', f'', ..., f^(m)), m >= 5.

    Thresholds are relative to the largest derivative magnitude.  Returns
    "Regular", "A1", ..., or "Unresolved" when every derivative is below
    threshold.
    """
    d = np.abs(np.asarray(jet, dtype=float))
    if d.ndim != 1 or d.size < 5:
        raise ValidationError("germ_type needs at least five derivatives", "jet")
    scale = float(d.max())
    if scale == 0.0 or not np.isfinite(scale):
        return "Unresolved"
    cut = tol * scale
    if d[0] > cut:
        return "Regular"
    for j in range(2, d.size + 1):
        if d[j - 1] > cut:
            return f"A{j - 1}"
    return "Unresolved"


def family_germ_type(F, q, x0=0.0, x1=0.0, x2=0.0, t=0.0, tol=1e-9):
    """germ_type of q -> F(q, x, t) at a point of the critical set."""
    return germ_type([F.dq(q, x0, x1, x2, t, k=k) for k in range(1, 6)], tol)
