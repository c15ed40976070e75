"""Acceptance criteria, one test each, at the stated tolerances and time limits.

Every test records a single PASS/FAIL line; the lines are printed together in
the terminal summary (see conftest.py).
"""

import time

import numpy as np
import pytest
from scipy.spatial import cKDTree

from brcaustics import normal_forms as nf
from brcaustics.curves import Singularity, classify_slice, conical_evidence, detect_conical_momentary_curve
from brcaustics.distance import Verdict, contact_residual, criticality_check, focal_mu_roots
from brcaustics.lightcone import curvatures_on, sheet_data, weingarten_residuals
from brcaustics.lightsheets import lightlike_focal_points, maxwell_bruteforce, maxwell_set
from brcaustics.minkowski import pseudo_dot, wedge
from brcaustics.scene import builtin_scene
from brcaustics.verify import check_curves
from brcaustics.worldsheet import WorldSheet, frame_residual

RESULTS = {}
GRID = (200, 20)


def record(number, name, passed, detail):
    line = f"[{'PASS' if passed else 'FAIL'}] {number:>2}. {name}: {detail}"
    RESULTS[number] = line
    print(line)
    return passed


def sheet(name, grid=GRID):
    scene = builtin_scene(name)
    return WorldSheet(scene.replace(grid=grid)) if grid else WorldSheet(scene)


def test_01_wedge_orthogonality():
    t0 = time.perf_counter()
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(1000):
        d = int(rng.integers(3, 6))
        vs = rng.normal(size=(d - 1, d)) * 10.0 ** rng.uniform(-3, 3, size=(d - 1, 1))
        w = wedge(list(vs))
        norms = np.max(np.abs(vs), axis=1)
        scale = np.prod(norms)
        for i, v in enumerate(vs):
            worst = max(worst, abs(pseudo_dot(v, w)) / (scale * norms[i]))
    dt = time.perf_counter() - t0
    ok = record(1, "wedge orthogonality", worst <= 1e-9 and dt < 1.0, f"max rel |<x_i, wedge>| = {worst:.2e}, {dt:.2f} s")
    assert ok


def test_02_frame_identities():
    t0 = time.perf_counter()
    worst, worst_cf = 0.0, 0.0
    for name in ("cylinder", "ellipse"):
        ws = sheet(name)
        us, t = ws.grid()
        f = ws.frames(us, t)
        assert f.ok.all()
        worst = max(worst, float(np.max(frame_residual(f))))
        for sign in "+-":
            lg = f.LG(sign)
            worst = max(worst, float(np.max(np.abs(pseudo_dot(lg, lg)))))
            worst = max(worst, float(np.max(np.abs(pseudo_dot(lg, f.Xu[0])))))
        assert np.all(f.nT[..., 0] > 0)
        if name == "cylinder":
            s = us[0]
            c, sn, z = np.cos(s), np.sin(s), np.zeros_like(s)
            refs = [(f.nS, np.stack([z, c, sn], -1)), (f.nT, np.stack([z + 1, z, z], -1)),
                    (f.LG("+"), np.stack([z + 1, c, sn], -1)), (f.LG("-"), np.stack([z + 1, -c, -sn], -1))]
            worst_cf = max(float(np.max(np.abs(a - b))) for a, b in refs)
    dt = time.perf_counter() - t0
    ok = record(2, "frame identities", worst <= 1e-8 and worst_cf <= 1e-10 and dt < 2.0,
                f"invariants {worst:.2e}, cylinder closed forms {worst_cf:.2e}, {dt:.2f} s")
    assert ok


def test_03_weingarten_residuals():
    t0 = time.perf_counter()
    worst = 0.0
    for name in ("cylinder", "ellipse"):
        ws = sheet(name)
        data = sheet_data(ws, *ws.grid())
        for sign in "+-":
            ra, rb = weingarten_residuals(data, sign)
            worst = max(worst, float(np.nanmax(ra)), float(np.nanmax(rb)))
    dt = time.perf_counter() - t0
    ok = record(3, "Weingarten residuals", worst <= 1e-5 and dt < 5.0, f"max relative residual {worst:.2e}, {dt:.2f} s")
    assert ok


def test_04_focal_roots_against_curvatures():
    t0 = time.perf_counter()
    ws = sheet("ellipse", None)
    rng = np.random.default_rng(4)
    lo, hi = ws.scene.mu_range
    worst, unconfirmed, matched = 0.0, 0, 0
    for _ in range(500):
        s, t = rng.uniform(*ws.scene.u_domain[0]), rng.uniform(*ws.scene.t_domain)
        data = sheet_data(ws, [np.array([s])], np.array([t]), frame_derivatives=False)
        for sign in "+-":
            k = curvatures_on(data, sign)[0][0]
            k = k[np.abs(k) > ws.tol["kappa_zero"]]
            mus = 1.0 / k
            mus = np.sort(mus[(mus > lo) & (mus < hi)])
            roots = np.array(focal_mu_roots(ws, s, t, sign))
            if roots.size != mus.size:
                worst = np.inf
                continue
            worst = max(worst, float(np.max(np.abs(roots - mus), initial=0.0)))
            for fp in lightlike_focal_points(ws, s, t, sign):
                matched += 1
                if criticality_check(ws, s, t, fp.lam).verdict is not Verdict.DEGENERATE_CRITICAL:
                    unconfirmed += 1
    dt = time.perf_counter() - t0
    ok = record(4, "focal roots vs 1/kappa", worst <= 1e-7 and unconfirmed == 0 and dt < 10.0,
                f"max |root - 1/kappa| {worst:.2e}, {matched} focal points, {unconfirmed} not degenerate critical, "
                f"{dt:.2f} s")
    assert ok


def test_05_two_path_curvatures():
    worst = max(check_curves(sheet(name))[0].value for name in ("cylinder", "ellipse"))
    ok = record(5, "kappa_g +- kappa_n = eigen curvatures", worst <= 1e-6, f"max gap {worst:.2e}")
    assert ok


def test_06_cylinder_conical():
    ws = sheet("cylinder")
    sig = spread = resid = 0.0
    found = True
    for t in ws.axes()[1]:
        for sign in "+-":
            a, b, c, _ = conical_evidence(ws, t, sign)
            sig, spread, resid = max(sig, a), max(spread, b), max(resid, c)
            found &= detect_conical_momentary_curve(ws, t, sign) is not None
    ok = record(6, "cylinder conical equivalence", found and max(sig, spread, resid) <= 1e-9,
                f"max |sigma| {sig:.2e}, focal spread {spread:.2e}, lightcone residual {resid:.2e}")
    assert ok


def test_07_ellipse_classification():
    ws = sheet("ellipse")
    vertices = np.array([0, np.pi / 2, np.pi, 3 * np.pi / 2])
    worst, wrong, sw_count = 0.0, 0, 0
    for t in ws.axes()[1]:
        for sign in "+-":
            out = classify_slice(ws, t, sign)
            sw = np.array([c.s for c in out if c.tag is Singularity.SWALLOWTAIL])
            sw_count += sw.size
            wrong += sum(c.tag not in (Singularity.SWALLOWTAIL, Singularity.CUSPIDAL_EDGE) for c in out)
            if sw.size != 4:
                wrong += 1
                continue
            d = np.abs(np.sort(sw)[:, None] - vertices[None, :])
            d = np.minimum(d, 2 * np.pi - d)
            worst = max(worst, float(np.max(np.min(d, axis=1))))
    ok = record(7, "ellipse swallowtails at the vertices", wrong == 0 and worst <= 1e-6,
                f"{sw_count} swallowtails, max |s - s*| {worst:.2e}, {wrong} misclassified samples/slices")
    assert ok


def test_08_form5_caustic_reproduction():
    t0 = time.perf_counter()
    axis = np.linspace(-1, 1, 41)
    U, W = np.meshgrid(axis, axis, indexing="ij")
    c = nf.family_caustic(nf.generating_family(5), q=U, x2=W)
    stated = np.stack([-(15 * U ** 4 + 3 * W * U ** 2), -10 * U ** 3 - 3 * W * U, W], axis=-1)
    dev_caustic = float(np.max(np.abs(c.points - stated)))
    Uq, V = nf.sw_parameters(U, W)
    sw = np.stack([3 * Uq ** 4 + V * Uq ** 2, 4 * Uq ** 3 + 2 * V * Uq, V], axis=-1)
    dev_sw = float(np.max(np.abs(nf.psi(c.points) - sw)))
    dt = time.perf_counter() - t0
    ok = record(8, "form-5 caustic and swallowtail image", dev_caustic <= 1e-12 and dev_sw <= 1e-12 and dt < 1.0,
                f"caustic deviation {dev_caustic:.3g}, psi-image deviation {dev_sw:.3g}, {dt:.2f} s")
    assert ok


def test_09_legendrian_contact():
    rng = np.random.default_rng(9)
    worst = 0.0
    r = np.linspace(0.0, 0.2, 5)
    for name in ("cylinder", "ellipse"):
        ws = sheet(name, None)
        (a, b), (ta, tb) = ws.scene.u_domain[0], ws.scene.t_domain
        for i in range(100):
            sign = "+-"[i % 2]
            u0, t0 = rng.uniform(a, b), rng.uniform(ta + 0.25, tb - 0.25)
            m0 = rng.uniform(0.3, 2.0) * rng.choice([-1.0, 1.0])
            du, dtt, dm = rng.normal(size=3)
            du, dtt, dm = np.array([du, dtt, dm]) / np.linalg.norm([du, dtt, dm])
            dm = abs(dm) * np.sign(m0)  # keep mu away from zero along the curve

            def path(x):
                return [u0 + du * x], t0 + dtt * x, m0 + dm * x

            res, scale = contact_residual(ws, path, sign, r)
            worst = max(worst, float(np.max(res / scale)))
    ok = record(9, "Legendrian contact residual", worst <= 1e-5, f"max relative residual {worst:.2e} over 200 curves")
    assert ok


def test_10_maxwell_sanity():
    ws = sheet("ellipse", None)
    m = maxwell_set(ws, (200, 5))
    pre = m.select(m.pre_focal)
    # swallowtail points of a slice: the focal points over the vertices s = 0, pi
    cusp = max(abs(lightlike_focal_points(ws, s, 0.5, "+")[0].lam[1]) for s in (0.0, np.pi))
    off_axis = float(np.max(np.abs(pre.lam[:, 2]))) if len(pre) else np.inf
    beyond = float(np.max(np.abs(pre.lam[:, 1]) - cusp, initial=0.0)) if len(pre) else np.inf
    brute = maxwell_bruteforce(ws, (48, 5))
    radius = brute.capture_radius
    if len(brute) and len(m):
        d_b = float(cKDTree(m.lam).query(brute.lam)[0].max())
        d_m = float(cKDTree(brute.lam).query(m.lam)[0].max())
    else:
        d_b = d_m = np.inf
    ok = record(10, "Maxwell set on the major axis",
                off_axis <= 1e-8 and beyond <= 1e-8 and max(d_b, d_m) <= radius,
                f"{len(pre)} pre-focal points, max |x2| {off_axis:.2e}, beyond cusps {beyond:.2e}, "
                f"brute-force/refined gaps {d_b:.3g}, {d_m:.3g} <= capture radius {radius:.3g}")
    assert ok
