import numpy as np
import pytest

from brcaustics.errors import DomainError, NotImmersed, NotSpacelike, NotTimelike, ValidationError
from brcaustics.minkowski import is_future_directed, pseudo_dot
from brcaustics.worldsheet import frame_residual, validate_worldsheet

from conftest import make_sheet


def test_embed_examples(cylinder, ellipse):
    assert np.allclose(cylinder.embed(0.0, 0.0), [0, 1, 0])
    assert np.allclose(ellipse.embed(np.pi / 2, 1.0), [1, 0, 1], atol=1e-15)
    with pytest.raises(DomainError):
        ellipse.embed(0.0, 2.0)


def test_periodic_detection(cylinder, flat, sphere):
    assert cylinder.periodic == (True,)
    assert flat.periodic == (False,)
    assert sphere.periodic == (False, True)
    # wrapping: a periodic parameter outside the interval is folded back
    assert np.allclose(cylinder.embed(2 * np.pi + 0.3, 0.0), cylinder.embed(0.3, 0.0))
    with pytest.raises(DomainError):
        flat.embed(1.5, 0.0)


@pytest.mark.parametrize("s", [0.0, 0.4, 2.0, 5.5])
def test_cylinder_frame_closed_form(cylinder, s):
    f = cylinder.frame_at(s, 0.3)
    assert np.allclose(f.nS, [0, np.cos(s), np.sin(s)], atol=1e-12)
    assert np.allclose(f.nT, [1, 0, 0], atol=1e-12)
    assert np.allclose(f.g, [[1.0]])
    assert np.allclose(f.LG("+"), [1, np.cos(s), np.sin(s)], atol=1e-12)
    assert np.allclose(f.LG("-"), [1, -np.cos(s), -np.sin(s)], atol=1e-12)


@pytest.mark.parametrize("name", ["cylinder", "ellipse", "wobble", "sphere"])
def test_frame_invariants_on_grid(name, request):
    ws = request.getfixturevalue(name)
    us, t = ws.grid()
    f = ws.frames(us, t)
    assert f.ok.all()
    assert np.max(frame_residual(f)) <= 1e-8
    assert np.all(f.nT[..., 0] > 0)
    for sign in "+-":
        lg = f.LG(sign)
        assert np.max(np.abs(pseudo_dot(lg, lg))) <= 1e-8
        for xu in f.Xu:
            assert np.max(np.abs(pseudo_dot(lg, xu))) <= 1e-8
    assert np.all(np.linalg.eigvalsh(f.g_matrix()) > 0)


def test_frame_reparametrization_covariant():
    a = make_sheet(["t", "cos(u1) + t/3", "sin(2*u1)/2"], (0.0, 1.0))
    b = make_sheet(["t", "cos(2*u1) + t/3", "sin(4*u1)/2"], (0.0, 0.5))
    for s in (0.1, 0.35, 0.8):
        fa, fb = a.frame_at(s, 0.4), b.frame_at(s / 2, 0.4)
        assert np.allclose(fa.nS, fb.nS, atol=1e-8)
        assert np.allclose(fa.nT, fb.nT, atol=1e-8)


def test_not_immersed():
    ws = make_sheet(["t", "u1^2", "u1^3"], (-1.0, 1.0))
    with pytest.raises(NotImmersed):
        ws.frame_at(0.0, 0.5)
    ws.frame_at(0.5, 0.5)


def test_not_timelike_and_not_spacelike():
    # the momentary curve is a timelike line and t moves through space
    ws = make_sheet(["u1", "t", "0"], (-1.0, 1.0))
    with pytest.raises(NotSpacelike):
        ws.frame_at(0.0, 0.5)
    # spacelike plane: x0 constant
    ws = make_sheet(["0.5*u1", "u1", "t"], (-1.0, 1.0))
    with pytest.raises(NotTimelike):
        ws.frame_at(0.0, 0.5)


def test_validate_reports_failures():
    ok = validate_worldsheet(make_sheet(["t", "cos(u1)", "sin(u1)"], (0.0, 6.0), grid=[20, 5]))
    assert ok.passed and ok.min_g_eigenvalue == pytest.approx(1.0)
    bad = validate_worldsheet(make_sheet(["u1", "t", "0"], (-1.0, 1.0), grid=[20, 5]))
    assert not bad.passed
    assert bad.failures["spacelike"] > 0
    rows = list(bad.rows())
    assert any(r[2] == "FAIL" for r in rows)


def test_plane_with_repeated_coordinate_is_valid():
    # (t, u1, u1) is a flat timelike plane, so it validates
    rep = validate_worldsheet(make_sheet(["t", "u1", "u1"], (-1.0, 1.0), grid=[10, 3]))
    assert rep.passed


def test_frame_at_rejects_batches(cylinder):
    with pytest.raises(ValidationError):
        cylinder.frame_at(np.array([0.0, 1.0]), 0.0)


def test_jet_modes_agree(wobble):
    j = wobble.jet([np.array([0.3, 1.7])], np.array([0.2, 0.6]), 2)
    k = wobble.jet([np.array([0.3, 1.7])], np.array([0.2, 0.6]), 2, mode="finite_difference")
    assert np.allclose(j.coeffs, k.coeffs, atol=1e-5)
