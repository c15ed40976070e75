import numpy as np
import pytest

from brcaustics.distance import (G_eval, Verdict, contact_residual, criticality_check, distance_germ_jet,
                                 focal_mu_roots, legendrian_lift, tangent_lightcone_contact, verify_morse_family)
from brcaustics.errors import ValidationError
from brcaustics.lightcone import curvatures_on, sheet_data


def test_distance_value(cylinder):
    # X = (t, cos s, sin s); from the axis point (t, 0, 0) the squared distance is 1
    assert G_eval(cylinder, 0.4, 0.2, [0.2, 0, 0]) == pytest.approx(1.0)
    assert G_eval(cylinder, 0.4, 0.2, [1.2, 0, 0]) == pytest.approx(0.0)


@pytest.mark.parametrize("lam, verdict", [
    ([-0.5, 0.0, 0.0], Verdict.DEGENERATE_CRITICAL),   # focal point of the + sheet at t = 0.5
    ([1.5, 0.0, 0.0], Verdict.DEGENERATE_CRITICAL),    # focal point of the - sheet
    ([-1.5, -1.0, 0.0], Verdict.CRITICAL),              # on the + light ray, mu = -2
    ([0.5, 0.0, 0.0], Verdict.NON_CRITICAL),
])
def test_criticality_verdicts(cylinder, lam, verdict):
    assert criticality_check(cylinder, 0.0, 0.5, lam).verdict is verdict


def test_criticality_rejects_sheet_point(cylinder):
    with pytest.raises(ValidationError):
        criticality_check(cylinder, 0.0, 0.5, cylinder.embed(0.0, 0.5))


@pytest.mark.parametrize("sign, root", [("+", -1.0), ("-", 1.0)])
def test_cylinder_focal_roots(cylinder, sign, root):
    assert focal_mu_roots(cylinder, 1.1, 0.3, sign) == pytest.approx([root], abs=1e-10)


def test_flat_has_no_focal_roots(flat):
    assert focal_mu_roots(flat, 0.2, 0.3, "+") == []


def test_sphere_double_root(sphere):
    roots = focal_mu_roots(sphere, [1.0, 0.5], 0.3, "+")
    assert len(roots) == 1 and abs(roots[0]) == pytest.approx(1.0, abs=1e-6)


def test_focal_roots_match_curvatures(ellipse):
    rng = np.random.default_rng(3)
    for _ in range(10):
        s, t = rng.uniform(0, 2 * np.pi), rng.uniform(0, 1)
        data = sheet_data(ellipse, [np.array([s])], np.array([t]), frame_derivatives=False)
        for sign in "+-":
            k = curvatures_on(data, sign)[0][0, 0]
            mu = 1.0 / k
            if ellipse.scene.mu_range[0] < mu < ellipse.scene.mu_range[1]:
                assert focal_mu_roots(ellipse, s, t, sign) == pytest.approx([mu], abs=1e-9)


def test_morse_family(cylinder):
    rep = verify_morse_family(cylinder, 0.3, 0.5, cylinder.embed(0.3, 0.5) + 0.7 * np.array([1, np.cos(0.3), np.sin(0.3)]))
    assert rep.passed and rep.rank == 2
    with pytest.raises(ValidationError):
        verify_morse_family(cylinder, 0.0, 0.5, [0.5, 0, 0])


@pytest.mark.parametrize("sign, k", [("+", -1.0), ("-", 1.0)])
def test_legendrian_lift_cylinder(cylinder, sign, k):
    s = 0.8
    lam, t, p = legendrian_lift(cylinder, s, 0.4, 0.5, sign)
    e = 1.0 if sign == "+" else -1.0
    assert np.allclose(lam, [0.9, (1 + 0.5 * e) * np.cos(s), (1 + 0.5 * e) * np.sin(s)])
    assert np.allclose(p, [1.0, -e * np.cos(s), -e * np.sin(s)])
    with pytest.raises(ValidationError):
        legendrian_lift(cylinder, s, 0.4, 0.0, sign)


def test_lift_is_legendrian(wobble):
    rng = np.random.default_rng(5)
    for sign in "+-":
        for _ in range(5):
            u0, t0, m0 = rng.uniform(0.5, 5.5), rng.uniform(0.2, 0.8), rng.uniform(0.3, 1.5)
            du, dt, dm = rng.normal(size=3) * 0.1

            def path(r):
                return [u0 + du * r], t0 + dt * r, m0 + dm * r

            res, scale = contact_residual(wobble, path, sign, np.array([0.0, 0.3]))
            assert np.all(res / scale <= 1e-6)


def test_tangent_contact(cylinder):
    # the lightcone from a focal point on the axis touches the whole momentary circle
    for s in (0.0, 1.0, np.pi):
        assert tangent_lightcone_contact(cylinder, s, 0.5, [-0.5, 0, 0])
    assert not tangent_lightcone_contact(cylinder, 0.0, 0.5, [0.5, 0.3, 0])


def test_distance_germ_derivatives(ellipse):
    # ellipse (t, 2 cos s, sin s), lambda on the axis at the focal time: g = 4cos^2 + sin^2 - 1 + const
    g = distance_germ_jet(ellipse, 0.4, 0.5, [0.5, 0.0, 0.0], order=3)
    assert g[0] == pytest.approx(-3 * np.sin(0.8))
    assert g[1] == pytest.approx(-6 * np.cos(0.8))
    assert g[2] == pytest.approx(12 * np.sin(0.8))
