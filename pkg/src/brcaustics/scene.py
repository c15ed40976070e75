"""Scene files: JSON documents describing a world sheet and how to sample it."""

import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from types import MappingProxyType

from .errors import CausticError, ValidationError
from .expression import evaluate, parse_expression, to_text

DEFAULT_MU_RANGE = (-3.0, 3.0)
DEFAULT_U_SAMPLES = 200
DEFAULT_T_SAMPLES = 50
DEFAULT_FD_STEP = 1e-3
DIFF_MODES = ("jets", "finite_difference")

DEFAULT_TOLERANCES = {
    "causal": 1e-9,        # causal character band, relative to |x|^2
    "immersion": 1e-8,     # wedge norm relative to the tangent norms
    "frame": 1e-8,         # frame orthonormality checks
    "kappa_zero": 1e-10,   # |kappa| below this means focal point at infinity
    "dual_path": 1e-5,     # agreement of the two second fundamental form paths
    "critical": 1e-6,      # criticality oracle, relative
    "rank": 1e-8,          # singular value cut, relative to the largest
    "root": 1e-10,         # mu-root bracketing width
    "sigma": 1e-6,         # sigma thresholds, relative to curvature scale
}


@dataclass(frozen=True)
class Scene:
    dim: int
    embedding: tuple
    u_domain: tuple
    t_domain: tuple
    grid: tuple = ()
    mu_range: tuple = DEFAULT_MU_RANGE
    signs: tuple = ("+", "-")
    diff_mode: str = "jets"
    fd_step: float = DEFAULT_FD_STEP
    tolerances: MappingProxyType = field(default_factory=lambda: MappingProxyType(dict(DEFAULT_TOLERANCES)))
    name: str = ""

    @property
    def n(self):
        return self.dim - 1

    @property
    def u_names(self):
        return tuple(f"u{i}" for i in range(1, self.dim - 1))

    @property
    def param_names(self):
        return self.u_names + ("t",)

    def tol(self, key):
        return self.tolerances[key]

    def to_dict(self):
        return {
            "dim": self.dim,
            "embedding": [to_text(e) for e in self.embedding],
            "u_domain": [list(d) for d in self.u_domain],
            "t_domain": list(self.t_domain),
            "grid": list(self.grid),
            "mu_range": list(self.mu_range),
            "signs": list(self.signs),
            "diff_mode": self.diff_mode,
            "fd_step": self.fd_step,
            "tolerances": dict(self.tolerances),
        }

    def digest(self):
        """Short content hash, used to tag exported point clouds."""
        blob = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:12]

    def replace(self, **changes):
        data = {k: getattr(self, k) for k in self.__dataclass_fields__}
        data.update(changes)
        return Scene(**data)


def _number(value, fld):
    """A real number, given either as JSON number or constant expression like "2*pi"."""
    if isinstance(value, bool):
        raise ValidationError("expected a number", fld)
    if isinstance(value, (int, float)):
        x = float(value)
    elif isinstance(value, str):
        try:
            x = float(evaluate(parse_expression(value, variables=()), {}))
        except CausticError as exc:
            raise ValidationError(f"not a constant expression: {exc}", fld) from None
    else:
        raise ValidationError("expected a number", fld)
    if not math.isfinite(x):
        raise ValidationError("must be finite", fld)
    return x


def _interval(value, fld):
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ValidationError("expected an interval [a, b]", fld)
    a, b = _number(value[0], fld), _number(value[1], fld)
    if not a < b:
        raise ValidationError(f"degenerate interval [{a}, {b}]", fld)
    return (a, b)


def scene_from_dict(doc, name=""):
    """Validate a decoded scene document and fill in defaults."""
    if not isinstance(doc, dict):
        raise ValidationError("scene must be a JSON object")
    known = {"dim", "embedding", "u_domain", "t_domain", "grid", "mu_range", "signs",
             "diff_mode", "fd_step", "tolerances", "name", "description"}
    for key in doc:
        if key not in known:
            raise ValidationError("unknown key", key)
    for key in ("dim", "embedding", "u_domain", "t_domain"):
        if key not in doc:
            raise ValidationError("missing required key", key)

    dim = doc["dim"]
    if isinstance(dim, bool) or not isinstance(dim, int) or dim < 3:
        raise ValidationError("must be an integer >= 3", "dim")
    n = dim - 1
    params = tuple(f"u{i}" for i in range(1, n)) + ("t",)

    emb = doc["embedding"]
    if not isinstance(emb, list) or len(emb) != dim:
        raise ValidationError(f"expected {dim} expression strings", "embedding")
    exprs = []
    for i, text in enumerate(emb):
        if not isinstance(text, str):
            raise ValidationError("expected an expression string", f"embedding[{i}]")
        try:
            exprs.append(parse_expression(text, variables=params))
        except ValidationError as exc:
            raise ValidationError(str(exc), f"embedding[{i}]") from None

    u_dom = doc["u_domain"]
    if n - 1 == 1 and isinstance(u_dom, list) and len(u_dom) == 2 and not isinstance(u_dom[0], list):
        u_dom = [u_dom]
    if not isinstance(u_dom, list) or len(u_dom) != n - 1:
        raise ValidationError(f"expected {n - 1} intervals", "u_domain")
    u_domain = tuple(_interval(d, f"u_domain[{i}]") for i, d in enumerate(u_dom))
    t_domain = _interval(doc["t_domain"], "t_domain")

    grid = doc.get("grid", [DEFAULT_U_SAMPLES] * (n - 1) + [DEFAULT_T_SAMPLES])
    if not isinstance(grid, list) or len(grid) != n:
        raise ValidationError(f"expected {n} sample counts (u..., t)", "grid")
    for i, c in enumerate(grid):
        if isinstance(c, bool) or not isinstance(c, int) or c < 2:
            raise ValidationError("sample counts must be integers >= 2", f"grid[{i}]")

    mu_range = _interval(doc.get("mu_range", list(DEFAULT_MU_RANGE)), "mu_range")

    signs = doc.get("signs", ["+", "-"])
    if isinstance(signs, str):
        signs = ["+", "-"] if signs == "both" else [signs]
    if not isinstance(signs, list) or any(s not in ("+", "-") for s in signs):
        raise ValidationError("signs must be a subset of ['+', '-']", "signs")
    signs = tuple(s for s in ("+", "-") if s in signs)

    diff_mode = doc.get("diff_mode", "jets")
    if diff_mode not in DIFF_MODES:
        raise ValidationError(f"must be one of {DIFF_MODES}", "diff_mode")
    fd_step = _number(doc.get("fd_step", DEFAULT_FD_STEP), "fd_step")
    if fd_step <= 0:
        raise ValidationError("must be positive", "fd_step")

    tol = dict(DEFAULT_TOLERANCES)
    user_tol = doc.get("tolerances", {})
    if not isinstance(user_tol, dict):
        raise ValidationError("expected an object", "tolerances")
    for key, value in user_tol.items():
        if key not in DEFAULT_TOLERANCES:
            raise ValidationError("unknown tolerance", f"tolerances.{key}")
        x = _number(value, f"tolerances.{key}")
        if x < 0:
            raise ValidationError("must be non-negative", f"tolerances.{key}")
        tol[key] = x

    return Scene(dim=dim, embedding=tuple(exprs), u_domain=u_domain, t_domain=t_domain,
                 grid=tuple(grid), mu_range=mu_range, signs=signs, diff_mode=diff_mode,
                 fd_step=fd_step, tolerances=MappingProxyType(tol), name=doc.get("name", name))


def load_scene(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read scene file: {exc}", "path") from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    return scene_from_dict(doc, name=path.stem)


def builtin_scene(name):
    """Load one of the scenes shipped with the package (cylinder, ellipse, ...)."""
    path = Path(__file__).parent / "scenes" / f"{name}.json"
    if not path.exists():
        available = sorted(p.stem for p in path.parent.glob("*.json"))
        raise ValidationError(f"no built-in scene {name!r}; available: {available}", "scene")
    return load_scene(path)
