"""Command-line interface: ``geodiam <command> --surface SPEC [options]``.

Surfaces are given as an OBJ path, ``box:a,b,c`` or ``hull:n,seed``.
Surface points are 3D coordinates snapped onto the surface. Every command
prints one JSON document (or writes it to ``--output``).

Exit codes: 0 success, 1 check failed, 2 bad input, 3 node budget exceeded.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import re
import sys
from pathlib import Path

import numpy as np

from . import geodesic
from .config import DEFAULT_TOLERANCES, node_budget
from .diameter import DEFAULT_SAMPLES, DEFAULT_SEED, DEFAULT_STEPS, Sampler
from .diameter import antipodal_diameter, brute_force_diameter, farthest_point
from .errors import BudgetExceeded, GeodiamError
from .involution import central_symmetry
from .surface import build_box, build_symmetric_hull, locate_point, read_obj
from .surface import validate_sphere_topology

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

CONFIG_KEYS = {"tolerances", "samples", "seed", "steps", "budget", "snap_eps",
               "resolution", "swap_samples", "field_lattice"}
FIELD_LATTICE = 4
_COORD = re.compile(r"^-?[\d.eE+-]+(,-?[\d.eE+-]+)*$")


class UsageError(GeodiamError):
    """Bad command-line or config input (exit 2)."""


# ---------------------------------------------------------------------------
# input parsing
# ---------------------------------------------------------------------------

def load_config(path):
    """Read a JSON run config; unknown keys and non-positive numbers are rejected."""
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from None
    if not isinstance(data, dict):
        raise UsageError("config must be a JSON object")
    unknown = set(data) - CONFIG_KEYS
    if unknown:
        raise UsageError(f"unknown config key(s): {sorted(unknown)}")
    tol = data.get("tolerances", {})
    if not isinstance(tol, dict):
        raise UsageError("'tolerances' must be an object")
    try:
        DEFAULT_TOLERANCES.override(**tol)
    except (KeyError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    nums = [(k, v) for k, v in data.items() if k != "tolerances"] + list(tol.items())
    for key, value in nums:
        if isinstance(value, bool) or not isinstance(value, (int, float)) or not value > 0:
            raise UsageError(f"config value {key!r} must be a positive number")
    return data


def parse_surface(spec, tolerances=DEFAULT_TOLERANCES):
    """Build a surface from ``box:a,b,c``, ``hull:n,seed`` or an OBJ path."""
    kind, _, rest = spec.partition(":")
    try:
        if kind == "box" and rest:
            a, b, c = (float(v) for v in rest.split(","))
            return build_box(a, b, c, tolerances)
        if kind == "hull" and rest:
            n, seed = (int(v) for v in rest.split(","))
            return build_symmetric_hull(n, seed=seed, tolerances=tolerances)
    except ValueError:
        raise UsageError(f"malformed surface spec {spec!r}") from None
    path = Path(spec)
    if not path.is_file():
        raise UsageError(f"no such surface file or spec: {spec!r}")
    return read_obj(path, tolerances=tolerances)


def parse_point(text):
    try:
        xyz = [float(v) for v in text.split(",")]
    except ValueError:
        raise UsageError(f"malformed point {text!r}") from None
    if len(xyz) != 3 or not all(math.isfinite(v) for v in xyz):
        raise UsageError(f"point needs three finite coordinates: {text!r}")
    return np.array(xyz)


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


# ---------------------------------------------------------------------------
# outputs
# ---------------------------------------------------------------------------

def field_rows(s, source, lattice=FIELD_LATTICE, budget=None):
    """Distances from ``source`` on a barycentric lattice of every face.

    Rows are ``(face, b0, b1, b2, x, y, z, distance)``.
    """
    fld = geodesic.DistanceField(s, source, budget=budget)
    rows = []
    m = lattice
    for f in range(len(s.faces)):
        for i in range(m + 1):
            for j in range(m + 1 - i):
                b = (i / m, j / m, (m - i - j) / m)
                p = s.canonical(f, b)
                rows.append((f, *b, *s.embed(p).tolist(), fld.distance(p)))
    return rows


def write_field(path, rows):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["face", "b0", "b1", "b2", "x", "y", "z", "distance"])
        w.writerows(rows)


def _emit(args, doc):
    text = json.dumps(doc, indent=2)
    if args.output:
        Path(args.output).parent.mkdir(parents=True, exist_ok=True)
        Path(args.output).write_text(text + "\n")
    else:
        print(text)


def _plot_dir(args):
    return Path(args.plot) if args.plot else None


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

class Run:
    """Resolved settings of one invocation (flags override the config file)."""

    def __init__(self, args):
        cfg = load_config(args.config)
        self.tolerances = DEFAULT_TOLERANCES.override(**cfg.get("tolerances", {}))
        self.samples = args.samples or int(cfg.get("samples", DEFAULT_SAMPLES))
        self.seed = args.seed if args.seed is not None else int(cfg.get("seed", DEFAULT_SEED))
        self.steps = args.steps or int(cfg.get("steps", DEFAULT_STEPS))
        self.budget = args.budget or int(cfg.get("budget", node_budget()))
        self.snap_eps = args.snap_eps or cfg.get("snap_eps")
        self.resolution = int(cfg.get("resolution", 4096))
        self.swap_samples = int(cfg.get("swap_samples", 200))
        self.lattice = int(cfg.get("field_lattice", FIELD_LATTICE))
        self._surface = None
        self.spec = args.surface

    @property
    def surface(self):
        if self._surface is None:
            if not self.spec:
                raise UsageError("--surface is required")
            self._surface = parse_surface(self.spec, self.tolerances)
        return self._surface

    def locate(self, xyz):
        s = self.surface
        eps = self.snap_eps if self.snap_eps else s.tol.snap_rel * s.bbox_diag
        return locate_point(s, xyz, eps)

    def sampler(self):
        return Sampler(count=self.samples, seed=self.seed)


def cmd_validate(args, run):
    rep = validate_sphere_topology(run.surface)
    _emit(args, rep.to_dict())
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_distance(args, run):
    s = run.surface
    p, q = run.locate(parse_point(args.source)), run.locate(parse_point(args.target))
    path = geodesic.exact_distance(s, p, q, budget=run.budget)
    _emit(args, path.to_dict())
    if args.field:
        write_field(args.field, field_rows(s, p, run.lattice, run.budget))
    if args.plot:
        from .plotting import plot_paths
        plot_paths(s, [path.embedded()], _plot_dir(args) / "distance.png",
                   title=f"geodesic, length {path.length:.6f}",
                   markers=[("p", s.embed(p)), ("q", s.embed(q))])
    return EXIT_OK


def cmd_diameter(args, run):
    s = run.surface
    if args.mode == "brute":
        # only used to report whether the maximizing pair is antipodal
        try:
            inv = central_symmetry(s)
        except GeodiamError:
            inv = None
    else:
        inv = central_symmetry(s)
    reports = {}
    if args.mode in ("antipodal", "both"):
        reports["antipodal"] = antipodal_diameter(s, inv, run.sampler(), True, run.steps,
                                                  budget=run.budget)
    if args.mode in ("brute", "both"):
        reports["brute"] = brute_force_diameter(s, run.sampler(), True, run.steps,
                                                involution=inv, budget=run.budget)
    code = EXIT_OK
    if args.mode == "both":
        defect = reports["antipodal"].diameter - reports["brute"].diameter
        ok = abs(defect) <= s.eps_match
        doc = {"antipodal": reports["antipodal"].to_dict(),
               "brute": reports["brute"].to_dict(),
               "agreement_defect": defect, "tolerance": s.eps_match, "agree": bool(ok)}
        code = EXIT_OK if ok else EXIT_FAIL
    else:
        doc = reports[args.mode].to_dict()
    _emit(args, doc)
    best = max(reports.values(), key=lambda r: r.diameter)
    if args.field:
        write_field(args.field, field_rows(s, best.pair[0], run.lattice, run.budget))
    if args.plot:
        from .plotting import plot_paths
        path = geodesic.exact_distance(s, *best.pair, budget=run.budget)
        plot_paths(s, [path.embedded()], _plot_dir(args) / "diameter.png",
                   title=f"{best.method} diameter {best.diameter:.6f}",
                   markers=[("x", s.embed(best.pair[0])), ("y", s.embed(best.pair[1]))])
    return code


def cmd_farthest(args, run):
    s = run.surface
    inv = central_symmetry(s)
    p = run.locate(parse_point(args.source))
    q, dist = farthest_point(s, p, run.sampler(), True, run.steps, budget=run.budget)
    opp = inv.apply(p)
    dopp = geodesic.distance(s, p, opp, budget=run.budget)
    doc = {"point": s.embed(q).tolist(), "distance": dist,
           "opposite_point": s.embed(opp).tolist(), "opposite_point_distance": dopp,
           "separation_from_opposite": float(np.linalg.norm(s.embed(q) - s.embed(opp))),
           "exceeds_opposite": bool(dist > dopp)}
    _emit(args, doc)
    if args.field:
        write_field(args.field, field_rows(s, p, run.lattice, run.budget))
    if args.plot:
        from .plotting import plot_paths
        paths = [geodesic.exact_distance(s, p, q, budget=run.budget).embedded(),
                 geodesic.exact_distance(s, p, opp, budget=run.budget).embedded()]
        plot_paths(s, paths, _plot_dir(args) / "farthest.png",
                   title=f"farthest {dist:.6f} vs opposite {dopp:.6f}",
                   markers=[("p", s.embed(p)), ("far", s.embed(q)), ("I(p)", s.embed(opp))])
    return EXIT_OK


def cmd_verify_theorem(args, run):
    from .theorem import DiscreteLengthSpace, discrete_theorem_check, verify_theorem
    if args.graph:
        rep = discrete_theorem_check(DiscreteLengthSpace.read(args.graph))
        _emit(args, rep.to_dict())
        return EXIT_OK if rep.equal else EXIT_FAIL
    doc = verify_theorem(args.trials, run.seed if args.seed is not None else 1,
                         samples=run.samples, steps=run.steps, resolution=run.resolution,
                         swap_samples=run.swap_samples)
    _emit(args, doc)
    if args.plot:
        from .plotting import plot_histogram
        defects = [r.get("agreement_defect", float("nan")) for r in doc["results"]]
        plot_histogram(defects, _plot_dir(args) / "agreement.png",
                       title="antipodal minus brute-force diameter", xlabel="defect")
    return EXIT_OK if doc["all_passed"] else EXIT_FAIL


def cmd_report(args, run):
    """Diameter (both methods), distance field CSV and figures in one folder."""
    from .plotting import plot_field, plot_histogram, plot_paths
    s = run.surface
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inv = central_symmetry(s)
    anti = antipodal_diameter(s, inv, run.sampler(), True, run.steps, budget=run.budget)
    brute = brute_force_diameter(s, run.sampler(), True, run.steps, involution=inv,
                                 budget=run.budget)
    defect = anti.diameter - brute.diameter
    doc = {"surface": run.spec, "antipodal": anti.to_dict(), "brute": brute.to_dict(),
           "agreement_defect": defect, "tolerance": s.eps_match,
           "agree": bool(abs(defect) <= s.eps_match),
           "validation": validate_sphere_topology(s).to_dict()}
    (out / "report.json").write_text(json.dumps(doc, indent=2) + "\n")
    x, y = anti.pair
    rows = field_rows(s, x, run.lattice, run.budget)
    write_field(out / "field.csv", rows)
    arr = np.array([r[4:] for r in rows])
    plot_field(s, arr[:, :3], arr[:, 3], out / "field.png", source=s.embed(x),
               title="distance from the antipodal maximizer")
    f = [geodesic.distance(s, p, inv.apply(p), budget=run.budget) for p in run.sampler().sample(s)]
    plot_histogram(f, out / "antipodal_samples.png", title="rho(p, I(p)) over samples",
                   xlabel="rho(p, I(p))", mark=anti.diameter)
    paths = [geodesic.exact_distance(s, *r.pair, budget=run.budget).embedded() for r in (anti, brute)]
    plot_paths(s, paths, out / "diameter.png", title=f"diameter {max(anti.diameter, brute.diameter):.6f}",
               markers=[("x", s.embed(x)), ("I(x)", s.embed(y))])
    _emit(args, {"out": str(out), "files": sorted(p.name for p in out.iterdir()),
                 "agree": doc["agree"], "agreement_defect": defect})
    return EXIT_OK if doc["agree"] else EXIT_FAIL


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--surface", help="OBJ path, box:a,b,c or hull:n,seed")
    common.add_argument("--config", help="JSON run config")
    common.add_argument("--snap-eps", type=float, help="snapping radius (default 1e-6 x bbox)")
    common.add_argument("--samples", type=_positive_int, help="sample count")
    common.add_argument("--seed", type=int, help="sampler / trial seed")
    common.add_argument("--steps", type=_positive_int, help="refinement steps")
    common.add_argument("--budget", type=_positive_int, help="node budget per exact search")
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--field", help="write a distance-field CSV here")
    common.add_argument("--plot", help="write figures into this directory")

    p = argparse.ArgumentParser(prog="geodiam", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("validate", parents=[common], help="check closed sphere topology")
    d = sub.add_parser("distance", parents=[common], help="exact geodesic distance")
    d.add_argument("--from", dest="source", required=True, metavar="X,Y,Z")
    d.add_argument("--to", dest="target", required=True, metavar="X,Y,Z")
    m = sub.add_parser("diameter", parents=[common], help="intrinsic diameter")
    m.add_argument("--mode", choices=("brute", "antipodal", "both"), default="both")
    f = sub.add_parser("farthest", parents=[common], help="farthest point from a point")
    f.add_argument("--from", dest="source", required=True, metavar="X,Y,Z")
    v = sub.add_parser("verify-theorem", parents=[common], help="run the theorem pipeline")
    v.add_argument("--trials", type=_positive_int, default=20)
    v.add_argument("--graph", help="discrete length space JSON instead of hull trials")
    r = sub.add_parser("report", parents=[common], help="JSON, CSV and figures for one surface")
    r.add_argument("--out", required=True, help="output directory")
    return p


COMMANDS = {"validate": cmd_validate, "distance": cmd_distance, "diameter": cmd_diameter,
            "farthest": cmd_farthest, "verify-theorem": cmd_verify_theorem, "report": cmd_report}


def _join_coordinates(argv):
    # "--to -0.5,-0.5,-0.5" would otherwise be read as an unknown option
    out = []
    it = iter(argv)
    for tok in it:
        if tok in ("--from", "--to"):
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and _COORD.match(nxt):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(_join_coordinates(argv))
    try:
        run = Run(args)
        return COMMANDS[args.command](args, run)
    except BudgetExceeded as exc:
        print(json.dumps({"error": str(exc), "upper_bound": exc.upper_bound}), file=sys.stderr)
        return EXIT_BUDGET
    except GeodiamError as exc:
        print(json.dumps({"error": f"{type(exc).__name__}: {exc}"}), file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
