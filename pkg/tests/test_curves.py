import warnings

import numpy as np
import pytest

from brcaustics.curves import (Singularity, SmoothnessWarning, classify_lightsheet_point, classify_slice,
                               conical_evidence, detect_conical_momentary_curve, frenet_frame, frenet_residuals,
                               lightcone_curvatures, sigma_invariant)
from brcaustics.errors import ValidationError
from brcaustics.minkowski import pseudo_dot

from conftest import make_sheet


def ellipse_kn(s):
    return -2.0 / (4 * np.sin(s) ** 2 + np.cos(s) ** 2) ** 1.5


def test_ellipse_curvatures(ellipse):
    s = np.linspace(0, 2 * np.pi, 17)
    f = frenet_frame(ellipse, s, np.full(s.size, 0.4))
    assert np.allclose(f.kappa_n, ellipse_kn(s))
    assert np.allclose(f.kappa_g, 0, atol=1e-13) and np.allclose(f.tau_g, 0, atol=1e-13)
    assert np.allclose(f.speed, np.sqrt(4 * np.sin(s) ** 2 + np.cos(s) ** 2))


def test_frame_is_pseudo_orthonormal(wobble):
    s = np.linspace(0, 6, 9)
    t = np.full(s.size, 0.5)
    f = frenet_frame(wobble, s, t)
    assert np.allclose(pseudo_dot(f.t_vec, f.t_vec), 1)
    assert np.allclose(pseudo_dot(f.n_vec, f.n_vec), 1)
    assert np.allclose(pseudo_dot(f.b_vec, f.b_vec), -1)
    assert np.allclose(pseudo_dot(f.t_vec, f.n_vec), 0, atol=1e-12)
    assert np.all(f.b_vec[:, 0] > 0)
    assert np.max(frenet_residuals(wobble, s, t)) <= 1e-10


def test_lightcone_curvatures_split(cylinder):
    kp, km = lightcone_curvatures(cylinder, 0.3, 0.1)
    assert kp == pytest.approx(-1.0) and km == pytest.approx(1.0)


def test_singular_curve_rejected():
    ws = make_sheet(["t", "u1^2", "u1^3 + t"], (-1.0, 1.0))
    with pytest.raises(ValidationError):
        frenet_frame(ws, 0.0, 0.5)


@pytest.mark.parametrize("sign, e", [("+", 1.0), ("-", -1.0)])
def test_ellipse_sigma(ellipse, sign, e):
    # with kappa_g = tau_g = 0, sigma reduces to -+ kappa_n'
    s = np.pi / 4
    f = frenet_frame(ellipse, s, 0.2)
    dkn = 18 * np.sin(s) * np.cos(s) * (4 * np.sin(s) ** 2 + np.cos(s) ** 2) ** -2.5
    kn1 = f.orientation * dkn / f.speed
    sig, dsig = sigma_invariant(ellipse, s, 0.2, sign)
    assert sig == pytest.approx(-e * kn1)
    # at the vertex s = 0 sigma vanishes and its derivative is -+ kappa_n'' = -+18
    sig0, dsig0 = sigma_invariant(ellipse, 0.0, 0.2, sign)
    assert sig0 == pytest.approx(0, abs=1e-13)
    assert dsig0 == pytest.approx(-18 * e)


def test_sigma_reparametrization_invariant():
    a = make_sheet(["t", "2*cos(u1) + t*t/4", "sin(u1)"], (0.0, 6.2))
    b = make_sheet(["t", "2*cos(2*u1) + t*t/4", "sin(2*u1)"], (0.0, 3.1))
    for s in (0.4, 1.3, 3.0):
        for sign in "+-":
            assert np.allclose(sigma_invariant(a, s, 0.5, sign), sigma_invariant(b, s / 2, 0.5, sign), atol=1e-9)


def test_sigma_unchanged_by_reversing_the_parameter():
    a = make_sheet(["t", "2*cos(u1)", "sin(u1)"], (0.0, 6.2))
    b = make_sheet(["t", "2*cos(u1)", "-sin(u1)"], (0.0, 6.2))
    # b(s) = a(-s): reversing s also reverses the normal, which swaps the two light sheets
    fa, fb = frenet_frame(a, 0.7, 0.5), frenet_frame(b, 2 * np.pi - 0.7, 0.5)
    assert fa.kappa_n == pytest.approx(-fb.kappa_n)
    for sign in "+-":
        sa, da = sigma_invariant(a, 0.7, 0.5, sign)
        sb, db = sigma_invariant(b, 2 * np.pi - 0.7, 0.5, "-" if sign == "+" else "+")
        assert abs(sa) == pytest.approx(abs(sb)) and abs(da) == pytest.approx(abs(db))


def test_classify_examples(ellipse):
    assert classify_lightsheet_point(ellipse, 0.0, 0.5, "+").tag is Singularity.SWALLOWTAIL
    assert classify_lightsheet_point(ellipse, np.pi / 2, 0.5, "-").tag is Singularity.SWALLOWTAIL
    assert classify_lightsheet_point(ellipse, 0.6, 0.5, "+").tag is Singularity.CUSPIDAL_EDGE


def test_classify_without_focal_point(flat):
    with pytest.raises(ValidationError):
        classify_lightsheet_point(flat, 0.0, 0.5, "+")


def test_cylinder_is_conical(cylinder):
    assert classify_lightsheet_point(cylinder, 1.0, 0.5, "+").tag is Singularity.CONICAL_DEGENERATE
    assert np.allclose(detect_conical_momentary_curve(cylinder, 0.5, "+"), [-0.5, 0, 0], atol=1e-12)
    assert np.allclose(detect_conical_momentary_curve(cylinder, 0.5, "-"), [1.5, 0, 0], atol=1e-12)
    sig, spread, resid, lam = conical_evidence(cylinder, 0.5, "+")
    assert sig <= 1e-12 and spread <= 1e-12 and resid <= 1e-12


def test_ellipse_not_conical(ellipse):
    assert detect_conical_momentary_curve(ellipse, 0.5, "+") is None


@pytest.mark.parametrize("sign", "+-")
def test_ellipse_slice_has_four_swallowtails(ellipse, sign):
    out = classify_slice(ellipse, 0.5, sign, counts=(100, 2))
    sw = [c.s for c in out if c.tag is Singularity.SWALLOWTAIL]
    assert np.allclose(sorted(sw), [0, np.pi / 2, np.pi, 3 * np.pi / 2], atol=1e-10)
    assert all(c.tag in (Singularity.SWALLOWTAIL, Singularity.CUSPIDAL_EDGE) for c in out)
    assert [c.s for c in out] == sorted(c.s for c in out)


def test_finite_difference_smoothness_warning():
    kw = dict(diff_mode="finite_difference")
    coarse = make_sheet(["t", "2*cos(u1)", "sin(u1)"], (0.0, 6.2), fd_step=1e-4, **kw)
    with pytest.warns(SmoothnessWarning):
        sigma_invariant(coarse, 0.7, 0.5, "+")
    fine = make_sheet(["t", "2*cos(u1)", "sin(u1)"], (0.0, 6.2), fd_step=3e-3, **kw)
    with warnings.catch_warnings():
        warnings.simplefilter("error", SmoothnessWarning)
        sig, _ = sigma_invariant(fine, 0.7, 0.5, "+")
    exact = sigma_invariant(make_sheet(["t", "2*cos(u1)", "sin(u1)"], (0.0, 6.2)), 0.7, 0.5, "+")[0]
    assert sig == pytest.approx(exact, rel=1e-3)
