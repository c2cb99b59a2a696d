import csv
import json
import math
import subprocess
import sys

import pytest

from geodiam.cli import load_config, main, parse_point, parse_surface
from geodiam.errors import GeodiamError
from geodiam.surface import build_box, obj_text

SQRT5 = math.sqrt(5.0)
TETRA = "v 0 0 0\nv 1 0 0\nv 0 1 0\nv 0 0 1\nf 1 3 2\nf 1 2 4\nf 1 4 3\nf 2 3 4\n"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, (json.loads(out) if out.strip() else None), err


@pytest.fixture
def tetra_obj(tmp_path):
    path = tmp_path / "tetra.obj"
    path.write_text(TETRA)
    return path


# -- validate --------------------------------------------------------------

def test_validate_box(capsys, check_schema):
    code, doc, _ = run(capsys, "validate", "--surface", "box:1,1,1")
    assert code == 0
    check_schema("validation_report", doc)
    assert doc["passed"] and doc["euler_characteristic"] == 2


def test_validate_quad_face(capsys, tmp_path):
    path = tmp_path / "quad.obj"
    path.write_text("v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n")
    code, doc, err = run(capsys, "validate", "--surface", path)
    assert code == 2 and doc is None
    assert "non-triangular face" in err


def test_validate_open_mesh(capsys, tmp_path, check_schema):
    path = tmp_path / "open.obj"
    path.write_text(TETRA.rsplit("f", 1)[0])  # drop one face
    code, doc, _ = run(capsys, "validate", "--surface", path)
    assert code == 1
    check_schema("validation_report", doc)
    assert not doc["passed"] and len(doc["nonmanifold_edges"]) == 3


def test_validate_obj_round_trip(capsys, tmp_path):
    path = tmp_path / "box.obj"
    path.write_text(obj_text(build_box(1, 2, 3)))
    code, doc, _ = run(capsys, "validate", "--surface", path)
    assert code == 0 and doc["faces"] == 12


@pytest.mark.parametrize("spec", ["box:1,1", "hull:5", "box:0,1,1", "nowhere.obj"])
def test_bad_surface_spec(capsys, spec):
    code, _, err = run(capsys, "validate", "--surface", spec)
    assert code == 2 and "error" in json.loads(err)


# -- distance --------------------------------------------------------------

def test_distance_opposite_vertices(capsys, check_schema):
    code, doc, _ = run(capsys, "distance", "--surface", "box:1,1,1",
                       "--from", "0.5,0.5,0.5", "--to", "-0.5,-0.5,-0.5")
    assert code == 0
    check_schema("geodesic_path", doc)
    assert doc["length"] == pytest.approx(SQRT5, abs=1e-12)
    assert doc["points"][0] == [0.5, 0.5, 0.5]


def test_distance_to_itself(capsys):
    code, doc, _ = run(capsys, "distance", "--surface", "box:1,1,1",
                       "--from", "0.5,0.1,0.2", "--to", "0.5,0.1,0.2")
    assert code == 0 and doc["length"] == 0.0


@pytest.mark.parametrize("point", ["9,9,9", "1,2", "a,b,c"])
def test_distance_bad_point(capsys, point):
    code, _, _ = run(capsys, "distance", "--surface", "box:1,1,1",
                     "--from", point, "--to", "0,0,0.5")
    assert code == 2


def test_distance_budget_exceeded(capsys):
    code, _, err = run(capsys, "distance", "--surface", "hull:50,7", "--budget", "3",
                       "--from", "0,0,0", "--to", "0,0,0")
    # the origin is inside the hull, so snapping fails before any search
    assert code == 2
    s = parse_surface("hull:50,7")
    a, b = s.vertices[0], s.vertices[1] * -1
    code, _, err = run(capsys, "distance", "--surface", "hull:50,7", "--budget", "3",
                       "--from", ",".join(map(repr, a.tolist())),
                       "--to", ",".join(map(repr, b.tolist())))
    assert code == 3
    assert json.loads(err)["upper_bound"] > 0


def test_budget_from_environment(capsys, monkeypatch):
    monkeypatch.setenv("GEODIAM_BUDGET", "2")
    s = parse_surface("hull:50,7")
    a, b = s.vertices[0], -s.vertices[0]
    code, _, _ = run(capsys, "distance", "--surface", "hull:50,7",
                     "--from", ",".join(map(repr, a.tolist())),
                     "--to", ",".join(map(repr, b.tolist())))
    assert code == 3


def test_distance_field_csv_and_plot(capsys, tmp_path):
    field = tmp_path / "field.csv"
    code, _, _ = run(capsys, "distance", "--surface", "box:1,1,1", "--from", "0.5,0.5,0.5",
                     "--to", "-0.5,-0.5,-0.5", "--field", field, "--plot", tmp_path / "fig")
    assert code == 0
    rows = list(csv.DictReader(field.open()))
    assert len(rows) == 12 * 15  # 15 lattice points per face at spacing 1/4
    assert max(float(r["distance"]) for r in rows) == pytest.approx(SQRT5, abs=1e-12)
    assert min(float(r["distance"]) for r in rows) == 0.0
    assert (tmp_path / "fig" / "distance.png").stat().st_size > 0


# -- diameter --------------------------------------------------------------

def test_diameter_both_on_long_box(capsys, check_schema):
    code, doc, _ = run(capsys, "diameter", "--surface", "box:30,12,12")
    assert code == 0
    check_schema("diameter_both", doc)
    assert abs(doc["agreement_defect"]) <= 1e-6 * 30
    assert doc["agree"] and doc["antipodal"]["antipodal"]


def test_diameter_antipodal_on_hull(capsys, check_schema):
    code, doc, _ = run(capsys, "diameter", "--surface", "hull:50,7", "--mode", "antipodal",
                       "--samples", "60", "--steps", "20")
    assert code == 0
    check_schema("diameter_report", doc)
    assert doc["antipodal"] is True and doc["method"] == "antipodal" and doc["samples"] == 60


def test_diameter_modes_need_symmetry(capsys, tetra_obj):
    code, _, err = run(capsys, "diameter", "--surface", tetra_obj, "--mode", "antipodal")
    assert code == 2 and "NotSymmetric" in err
    code, doc, _ = run(capsys, "diameter", "--surface", tetra_obj, "--mode", "brute",
                       "--samples", "20")
    assert code == 0 and doc["antipodal"] is False and doc["antipodal_gap"] is None


def test_diameter_is_deterministic(capsys):
    argv = ("diameter", "--surface", "box:1,1,2", "--mode", "antipodal", "--samples", "40",
            "--seed", "3")
    _, a, _ = run(capsys, *argv)
    _, b, _ = run(capsys, *argv)
    a.pop("elapsed")
    b.pop("elapsed")
    assert a == b


# -- farthest --------------------------------------------------------------

def test_farthest_on_long_box(capsys, check_schema):
    code, doc, _ = run(capsys, "farthest", "--surface", "box:1,1,4", "--from", "0.5,0.5,2")
    assert code == 0
    check_schema("farthest", doc)
    assert doc["exceeds_opposite"]
    assert doc["distance"] > doc["opposite_point_distance"]
    assert doc["separation_from_opposite"] > 0.1


def test_farthest_from_face_centre(capsys):
    code, doc, _ = run(capsys, "farthest", "--surface", "box:1,1,1", "--from", "0,0,0.5")
    assert code == 0
    assert doc["separation_from_opposite"] < 1e-6
    assert doc["distance"] == pytest.approx(2.0, abs=1e-9)


def test_farthest_off_surface(capsys):
    code, _, _ = run(capsys, "farthest", "--surface", "box:1,1,1", "--from", "0,0,0")
    assert code == 2


# -- verify-theorem --------------------------------------------------------

def test_verify_zero_trials_is_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify-theorem", "--trials", "0"])
    assert exc.value.code == 2


def test_verify_small_run(capsys, tmp_path, check_schema):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"resolution": 512, "swap_samples": 30}))
    code, doc, _ = run(capsys, "verify-theorem", "--trials", "1", "--samples", "40",
                       "--steps", "20", "--config", cfg)
    check_schema("verify_theorem", doc)
    assert code == 0 and doc["all_passed"] and doc["seed"] == 1


def test_verify_graph(capsys, tmp_path, check_schema):
    from geodiam.theorem import icosahedron_space
    path = tmp_path / "ico.json"
    path.write_text(json.dumps(icosahedron_space(2).to_dict()))
    code, doc, _ = run(capsys, "verify-theorem", "--graph", path)
    assert code == 0
    check_schema("discrete_report", doc)
    assert doc["diameter"] == doc["antipodal_max"] == 12 and doc["exact"]


def test_verify_disconnected_graph(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 4, "edges": [[0, 1, 1], [2, 3, 1]],
                                "involution": [1, 0, 3, 2]}))
    code, _, err = run(capsys, "verify-theorem", "--graph", path)
    assert code == 2 and "disconnected" in err


# -- report ----------------------------------------------------------------

def test_report_folder(capsys, tmp_path):
    out = tmp_path / "rep"
    code, doc, _ = run(capsys, "report", "--surface", "box:1,1,2", "--samples", "40",
                       "--steps", "20", "--out", out)
    assert code == 0 and doc["agree"]
    for name in ("report.json", "field.csv", "field.png", "antipodal_samples.png",
                 "diameter.png"):
        assert (out / name).stat().st_size > 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["validation"]["passed"]


# -- config ----------------------------------------------------------------

def test_config_file(tmp_path, check_schema):
    cfg = tmp_path / "cfg.json"
    doc = {"samples": 10, "seed": 4, "tolerances": {"snap_rel": 1e-5}}
    cfg.write_text(json.dumps(doc))
    check_schema("run_config", doc)
    assert load_config(cfg) == doc


@pytest.mark.parametrize("doc", [{"colour": 1}, {"samples": 0}, {"steps": -3},
                                 {"tolerances": {"nope": 1.0}}, {"seed": True}, [1, 2]])
def test_config_rejections(capsys, tmp_path, doc):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(doc))
    with pytest.raises(GeodiamError):
        load_config(cfg)
    code, _, _ = run(capsys, "validate", "--surface", "box:1,1,1", "--config", cfg)
    assert code == 2


def test_output_file(capsys, tmp_path):
    out = tmp_path / "sub" / "v.json"
    code, doc, _ = run(capsys, "validate", "--surface", "box:1,1,1", "-o", out)
    assert code == 0 and doc is None
    assert json.loads(out.read_text())["passed"]


def test_negative_coordinates_parse():
    assert parse_point("-0.5,1e-3,2").tolist() == [-0.5, 0.001, 2.0]


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "geodiam", "distance", "--surface", "box:1,1,1",
                          "--from", "0.5,0.5,0.5", "--to", "-0.5,-0.5,-0.5"],
                         capture_output=True, text=True, timeout=120)
    assert res.returncode == 0
    assert json.loads(res.stdout)["length"] == pytest.approx(SQRT5)
