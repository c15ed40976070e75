import pytest

from brcaustics.scene import builtin_scene, scene_from_dict
from brcaustics.worldsheet import WorldSheet


@pytest.fixture(scope="session")
def cylinder():
    return WorldSheet(builtin_scene("cylinder"))


@pytest.fixture(scope="session")
def ellipse():
    return WorldSheet(builtin_scene("ellipse"))


@pytest.fixture(scope="session")
def flat():
    return WorldSheet(builtin_scene("flat"))


@pytest.fixture(scope="session")
def wobble():
    return WorldSheet(builtin_scene("wobble"))


@pytest.fixture(scope="session")
def sphere():
    return WorldSheet(builtin_scene("sphere"))


def make_sheet(embedding, u_domain=(0.0, 1.0), t_domain=(0.0, 1.0), **extra):
    if u_domain and not isinstance(u_domain[0], (list, tuple)):
        u_domain = [u_domain]
    doc = {"dim": len(embedding), "embedding": list(embedding),
           "u_domain": [list(d) for d in u_domain], "t_domain": list(t_domain)}
    doc.update(extra)
    return WorldSheet(scene_from_dict(doc))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for key in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[key])
