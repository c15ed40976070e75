"""Cross-checks of a scene against independent oracles.

Each check returns the worst observed value and the tolerance it is held
to.  The suite is what the ``verify`` subcommand prints.
"""

from dataclasses import dataclass

import numpy as np

from .distance import G_eval, contact_residual, focal_mu_roots
from .lightcone import curvatures_on, dual_path_gap, second_fundamental_pair, sheet_data, weingarten_residuals
from .lightsheets import br_caustic


@dataclass
class Check:
    name: str
    value: float
    tol: float
    detail: str = ""

    @property
    def passed(self):
        return bool(np.isfinite(self.value) and self.value <= self.tol)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        extra = f"  ({self.detail})" if self.detail else ""
        return f"{status}  {self.name}: {self.value:.3g} <= {self.tol:g}{extra}"


def random_samples(ws, count, rng):
    """Uniform random (u list, t) inside the scene domain."""
    us = [rng.uniform(a, b, count) for a, b in ws.scene.u_domain]
    t = rng.uniform(*ws.scene.t_domain, count)
    return us, t


def _worst(a):
    a = np.asarray(a, dtype=float)
    return float(np.nanmax(a)) if a.size else 0.0


def check_frames(ws, counts=None):
    data = sheet_data(ws, *ws.grid(counts))
    from .worldsheet import frame_residual, build_frame
    f = build_frame(data.X, list(np.moveaxis(data.Xu, 1, 0)), data.Xt, ws.tol["immersion"], ws.tol["causal"])
    res = np.where(f.ok, frame_residual(f), np.nan)
    lg = [np.abs(np.einsum("nd,nd->n", data.LG(s) * np.r_[-1.0, np.ones(ws.dim - 1)], data.LG(s)))
          for s in ("+", "-")]
    out = [Check("frame orthonormality", _worst(res), ws.tol["frame"]),
           Check("LG lightlike", _worst(np.where(data.ok, np.maximum(*lg), np.nan)), ws.tol["frame"])]
    skipped = int((~data.ok).sum())
    if skipped:
        out.append(Check("invalid frame samples", float(skipped), 0.0))
    return out, data


def check_second_fundamental(ws, data):
    out = []
    for s in ("+", "-"):
        h_b, h_a = second_fundamental_pair(data, s)
        out.append(Check(f"dual-path second fundamental form [{s}]",
                         _worst(np.where(data.ok, dual_path_gap(h_b, h_a), np.nan)), ws.tol["dual_path"]))
        ra, rb = weingarten_residuals(data, s)
        out.append(Check(f"Weingarten residual (a) [{s}]", _worst(ra), 1e-5))
        out.append(Check(f"Weingarten residual (b) [{s}]", _worst(rb), 1e-5))
    return out


def check_focal_roots(ws, count, rng):
    """Roots of det Hess(g) along the ray against 1/kappa from the eigen path."""
    us, t = random_samples(ws, count, rng)
    data = sheet_data(ws, us, t, frame_derivatives=False)
    lo, hi = ws.scene.mu_range
    worst, missed = 0.0, 0
    for s in ("+", "-"):
        kappas, _, _ = curvatures_on(data, s)
        for i in np.flatnonzero(data.ok):
            u_i = [x[i] for x in data.u]
            roots = np.array(focal_mu_roots(ws, u_i, data.t[i], s))
            k = kappas[i]
            with np.errstate(divide="ignore"):
                mus = 1.0 / k[np.abs(k) > ws.tol["kappa_zero"]]
            mus = mus[(mus > lo) & (mus < hi)]
            for m in mus:
                if roots.size == 0:
                    missed += 1
                    continue
                worst = max(worst, float(np.min(np.abs(roots - m))))
            for r in roots:
                worst = max(worst, float(np.min(np.abs(mus - r))) if mus.size else np.inf)
    return Check("focal roots vs 1/kappa", worst if not missed else np.inf, 1e-7,
                 f"{count} samples" + (f", {missed} eigen roots without scan root" if missed else ""))


def check_focal_oracle(ws, counts=None):
    cloud = br_caustic(ws, counts, ("+", "-"))
    return Check("focal points confirmed degenerate critical", float(cloud.rejected), 0.0,
                 f"{len(cloud)} focal points")


def check_gradient(ws, count, rng, h=1e-6):
    """Closed-form u-gradient of G against central differences of G_eval."""
    us, t = random_samples(ws, count, rng)
    data = sheet_data(ws, us, t, frame_derivatives=False)
    lam = data.X + rng.normal(size=data.X.shape)
    d = data.X - lam
    grad = 2 * np.einsum("nkd,nd->nk", data.Xu * np.r_[-1.0, np.ones(ws.dim - 1)], d)
    worst = 0.0
    for i in range(ws.n - 1):
        up = [x.copy() for x in us]
        um = [x.copy() for x in us]
        a, b = ws.scene.u_domain[i]
        ok = (us[i] - h > a) & (us[i] + h < b)
        up[i] = np.where(ok, us[i] + h, us[i])
        um[i] = np.where(ok, us[i] - h, us[i])
        fd = (G_eval(ws, up, t, lam) - G_eval(ws, um, t, lam)) / (2 * h)
        rel = np.abs(fd - grad[:, i]) / np.maximum(1.0, np.abs(grad[:, i]))
        worst = max(worst, _worst(np.where(ok & data.ok, rel, np.nan)))
    return Check("gradient of G vs finite differences", worst, 1e-5)


def check_contact(ws, count, rng):
    """Contact form dt - p.dlam along random straight curves in (u, t, mu)."""
    worst = 0.0
    lo, hi = ws.scene.mu_range
    k = ws.n - 1
    margin = 0.05
    for s in ("+", "-"):
        us, t = random_samples(ws, count, rng)
        mu0 = rng.uniform(0.2, 1.0, count) * rng.choice([-1.0, 1.0], count) * max(abs(lo), abs(hi)) / 2
        du = rng.normal(size=(k, count))
        dt = rng.normal(size=count)
        dm = rng.normal(size=count)
        for i in range(count):
            u_i = [x[i] for x in us]

            def path(r, i=i, u_i=u_i):
                u = [np.clip(u_i[j] + du[j, i] * r, ws.scene.u_domain[j][0] + 1e-3, ws.scene.u_domain[j][1] - 1e-3)
                     for j in range(k)]
                tt = np.clip(t[i] + dt[i] * r, ws.scene.t_domain[0] + 1e-3, ws.scene.t_domain[1] - 1e-3)
                return u, tt, mu0[i] + dm[i] * r

            r = np.array([0.0]) * margin
            res, scale = contact_residual(ws, path, s, r)
            worst = max(worst, float(np.max(res / scale)))
    return Check("Legendrian contact residual", worst, 1e-5, f"{2 * count} curves")


def check_curves(ws, counts=None):
    from .curves import frenet_residuals, lightcone_curvatures
    us, t = ws.grid(counts)
    s, t = us[0].ravel(), t.ravel()
    data = sheet_data(ws, [s], t, frame_derivatives=False)
    kp, km = lightcone_curvatures(ws, s, t)
    worst = 0.0
    for sg, k in (("+", kp), ("-", km)):
        ke, _, _ = curvatures_on(data, sg)
        worst = max(worst, _worst(np.where(data.ok, np.abs(ke[:, 0] - k), np.nan)))
    return [Check("kappa_g +- kappa_n vs eigenvalues", worst, 1e-6),
            Check("Frenet-Serret residual", _worst(np.where(data.ok, frenet_residuals(ws, s, t), np.nan)), 1e-6)]


def run_suite(ws, counts=None, samples=50, seed=0):
    """All checks on one scene, in a fixed order."""
    rng = np.random.default_rng(seed)
    checks, data = check_frames(ws, counts)
    checks += check_second_fundamental(ws, data)
    checks.append(check_focal_roots(ws, samples, rng))
    checks.append(check_focal_oracle(ws, counts))
    checks.append(check_gradient(ws, samples, rng))
    checks.append(check_contact(ws, samples, rng))
    if ws.n == 2:
        checks += check_curves(ws, counts)
    return checks
