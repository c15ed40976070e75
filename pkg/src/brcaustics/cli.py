"""Command line interface: ``brcaustics <subcommand> --scene <file> ...``.

Exit codes: 0 success, 2 invalid input or failed validation, 1 numerical failure.
"""

import argparse
import sys
from pathlib import Path

import numpy as np

from .errors import CausticError, ValidationError
from .export import FORMATS, write_csv, write_obj

EXIT_OK, EXIT_NUMERICAL, EXIT_INVALID = 0, 1, 2


def _load(args):
    from .scene import builtin_scene, load_scene
    from .worldsheet import WorldSheet
    if args.scene is None:
        raise ValidationError("--scene is required", "scene")
    p = Path(args.scene)
    scene = load_scene(p) if p.exists() or p.suffix == ".json" else builtin_scene(args.scene)
    if getattr(args, "grid", None):
        scene = scene.replace(grid=_grid_arg(args.grid, len(scene.grid)))
    return WorldSheet(scene)


def _grid_arg(text, count):
    try:
        vals = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise ValidationError(f"--grid expects comma-separated integers, got {text!r}", "grid") from None
    if len(vals) != count or min(vals) < 2:
        raise ValidationError(f"--grid needs {count} counts, each at least 2", "grid")
    return vals


def _signs(args, ws):
    if args.sign is None:
        return tuple(ws.scene.signs)
    return ("+", "-") if args.sign == "both" else (args.sign,)


def _floats(text, name):
    try:
        return [float(x) for x in text.split(",")]
    except ValueError:
        raise ValidationError(f"--{name} expects comma-separated numbers", name) from None


def _cloud_rows(ws, cloud):
    k = ws.n - 1
    for i in range(len(cloud)):
        yield (*cloud.lam[i], cloud.t[i], *[cloud.u[i, j] for j in range(k)], cloud.sign[i],
               int(cloud.branch[i]), cloud.kappa[i])


def _cloud_header(ws):
    return [f"x{i}" for i in range(ws.dim)] + ["t"] + list(ws.u_names) + ["sign", "branch", "kappa"]


def _emit_points(args, header, rows, points, comment=None):
    if args.format == "obj":
        write_obj(args.out, points, comment)
    else:
        write_csv(args.out, header, rows)


def _report(msg):
    print(msg, file=sys.stderr)


# -- subcommands -----------------------------------------------------------------

def cmd_validate(args):
    from .worldsheet import validate_worldsheet
    ws = _load(args)
    rep = validate_worldsheet(ws)
    rows = list(rep.rows())
    w = max(len(r[0]) for r in rows)
    for name, value, status in rows:
        print(f"{name:<{w}}  {value:<24} {status}")
    print("valid" if rep.passed else "INVALID")
    return EXIT_OK if rep.passed else EXIT_INVALID


def cmd_caustic(args):
    from .lightsheets import br_caustic
    ws = _load(args)
    cloud = br_caustic(ws, signs=_signs(args, ws))
    _report(f"{len(cloud)} focal points, {cloud.skipped} samples skipped, {cloud.rejected} rejected by the oracle")
    _emit_points(args, _cloud_header(ws), _cloud_rows(ws, cloud), cloud.lam,
                 f"BR-caustic of {ws.scene.name} ({ws.scene.digest()})")
    return EXIT_OK


def cmd_focal(args):
    from .lightsheets import lightlike_focal_points
    ws = _load(args)
    if args.u is None or args.t is None:
        raise ValidationError("focal needs --u and --t", "u")
    u = _floats(args.u, "u")
    if len(u) != ws.n - 1:
        raise ValidationError(f"--u needs {ws.n - 1} values", "u")
    rows, pts = [], []
    for s in _signs(args, ws):
        for fp in lightlike_focal_points(ws, u, args.t, s):
            rows.append((*fp.lam, fp.t, *fp.u, fp.sign, fp.branch, fp.kappa))
            pts.append(fp.lam)
    _emit_points(args, _cloud_header(ws), rows, np.reshape(pts, (-1, ws.dim)))
    return EXIT_OK


def cmd_lightsheet(args):
    from .lightsheets import light_sheet_point
    ws = _load(args)
    us, t = ws.grid()
    mus = np.linspace(*ws.scene.mu_range, args.mu_count)
    header = [f"x{i}" for i in range(ws.dim)] + ["t"] + list(ws.u_names) + ["sign", "mu"]
    rows, pts = [], []
    for s in _signs(args, ws):
        for mu in mus:
            lam = light_sheet_point(ws, us, t, mu, s).reshape(-1, ws.dim)
            U = np.stack([x.ravel() for x in us], axis=-1)
            for i in range(lam.shape[0]):
                rows.append((*lam[i], t.ravel()[i], *U[i], s, mu))
            pts.append(lam)
    _emit_points(args, header, rows, np.concatenate(pts) if pts else np.zeros((0, ws.dim)))
    return EXIT_OK


def cmd_maxwell(args):
    from .lightsheets import maxwell_set
    ws = _load(args)
    m = maxwell_set(ws, signs=_signs(args, ws))
    _report(f"{len(m)} Maxwell points from {m.candidates} candidates, {m.dropped} dropped; "
            f"capture radius {m.capture_radius:.3g}")
    header = ["x0", "x1", "x2", "t", "s1", "s2", "sign1", "sign2", "mu1", "mu2", "pre_focal"]
    rows = ((*m.lam[i], m.t[i], m.s1[i], m.s2[i], m.sign1[i], m.sign2[i], m.mu1[i], m.mu2[i],
             int(m.pre_focal[i])) for i in range(len(m)))
    _emit_points(args, header, rows, m.lam)
    return EXIT_OK


def cmd_classify(args):
    from .curves import classify_slice
    ws = _load(args)
    ts = [args.t] if args.t is not None else list(ws.axes()[-1])
    rows = []
    for t in ts:
        for s in _signs(args, ws):
            for c in classify_slice(ws, t, s):
                rows.append((c.s, c.t, c.sign, c.sigma, c.dsigma_ds, c.tag.value))
    write_csv(args.out, ["s", "t", "sign", "sigma", "dsigma_ds", "class"], rows)
    return EXIT_OK


def cmd_verify(args):
    from .verify import run_suite
    ws = _load(args)
    checks = run_suite(ws, samples=args.samples, seed=args.seed)
    for c in checks:
        print(c.line())
    failed = sum(not c.passed for c in checks)
    print(f"{len(checks) - failed}/{len(checks)} checks passed")
    return EXIT_OK if not failed else EXIT_NUMERICAL


def cmd_evolute(args):
    from .lightcone import evolute_points
    ws = _load(args)
    ev = evolute_points(ws)
    _report(f"{ev.points.shape[0]} evolute points; {ev.complex_samples} samples with complex curvatures, "
            f"{ev.skipped} skipped")
    rows = ((*ev.points[i], int(ev.branch[i])) for i in range(ev.points.shape[0]))
    _emit_points(args, ["x0", "x1", "x2", "branch"], rows, ev.points)
    return EXIT_OK


def cmd_normal_form(args):
    from . import normal_forms as nf
    n, r = args.samples, args.range
    axis = np.linspace(-r, r, n)
    kind = args.kind
    if kind in ("ce", "sw", "py", "pu"):
        surf = nf.normal_form_surface(kind.upper(), (axis, axis))
        _emit_points(args, ["x0", "x1", "x2"], surf.points, surf.points)
        return EXIT_OK
    F = nf.generating_family(int(kind[-1]), sign_t=1 if args.sign in (None, "+", "both") else -1)
    if args.what == "front":
        Q, V, W = np.meshgrid(axis, axis, axis, indexing="ij")
        pts = nf.family_front(F, q=Q, x1=V, x2=W).reshape(-1, 4)
        _emit_points(args, ["x0", "x1", "x2", "t"], pts, pts[:, :3])
    else:
        Q, W = np.meshgrid(axis, axis, indexing="ij")
        c = nf.family_caustic(F, q=Q, x2=W, x1=W)
        pts = c.points.reshape(-1, 3)
        _emit_points(args, ["x0", "x1", "x2"], pts, pts)
    return EXIT_OK


# -- parser --------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scene", help="scene JSON file or built-in scene name")
    common.add_argument("--out", default="-", help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--sign", choices=("+", "-", "both"), default=None)
    common.add_argument("--grid", help="override sample counts, e.g. 200,20")

    p = argparse.ArgumentParser(prog="brcaustics",
                                description="Light sheets, caustics and Maxwell sets of world sheets.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check the world-sheet conditions on the grid")
    sub.add_parser("caustic", parents=[common], help="BR-caustic point cloud")
    f = sub.add_parser("focal", parents=[common], help="focal points over one (u, t)")
    f.add_argument("--u", help="comma-separated u values")
    f.add_argument("--t", type=float)
    ls = sub.add_parser("lightsheet", parents=[common], help="sample the light sheets")
    ls.add_argument("--mu-count", type=int, default=21)
    sub.add_parser("maxwell", parents=[common], help="BR-Maxwell set (3-dimensional scenes)")
    c = sub.add_parser("classify", parents=[common], help="singularity type along momentary curves")
    c.add_argument("--t", type=float, help="one slice (default: every grid slice)")
    v = sub.add_parser("verify", parents=[common], help="run the oracle cross-checks")
    v.add_argument("--samples", type=int, default=50)
    v.add_argument("--seed", type=int, default=0)
    sub.add_parser("evolute", parents=[common], help="evolute of the timelike surface")
    nf = sub.add_parser("normal-form", parents=[common], help="reference surfaces and normal-form families")
    nf.add_argument("--kind", required=True, choices=("ce", "sw", "py", "pu", "family3", "family4", "family5"))
    nf.add_argument("--what", choices=("caustic", "front"), default="caustic")
    nf.add_argument("--samples", type=int, default=41)
    nf.add_argument("--range", type=float, default=1.0)
    return p


COMMANDS = {
    "validate": cmd_validate, "caustic": cmd_caustic, "focal": cmd_focal, "lightsheet": cmd_lightsheet,
    "maxwell": cmd_maxwell, "classify": cmd_classify, "verify": cmd_verify, "evolute": cmd_evolute,
    "normal-form": cmd_normal_form,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except CausticError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except BrokenPipeError:
        sys.stderr.close()
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
