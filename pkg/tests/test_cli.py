"""Command-line interface: decompose / evaluate / bench, exit codes, JSON
errors.  Runs through click's in-process test runner."""

import json

import pytest
from click.testing import CliRunner

from regionacd import fixtures as F
from regionacd import save_mesh
from regionacd.cli import main

L_REGIONS = {
    "regions": [
        {"id": "notch", "min": [0, 1, 0], "max": [1, 2, 1], "tolerance": 0.0},
    ],
    "remainder_tolerance": 0.05,
    "seed": 0,
}


@pytest.fixture()
def workspace(tmp_path):
    mesh_path = tmp_path / "l.obj"
    save_mesh(F.l_prism(), mesh_path)
    regions_path = tmp_path / "regions.json"
    regions_path.write_text(json.dumps(L_REGIONS))
    return tmp_path, mesh_path, regions_path


def run(args):
    return CliRunner().invoke(main, [str(a) for a in args])


def test_help_lists_commands():
    result = run(["--help"])
    assert result.exit_code == 0
    for command in ("decompose", "evaluate", "bench", "serve"):
        assert command in result.output


def test_decompose_no_regions_single_part(tmp_path):
    mesh_path = tmp_path / "cube.obj"
    save_mesh(F.box_mesh(), mesh_path)
    out = tmp_path / "out"
    result = run(["decompose", mesh_path, "-o", out])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["parts"] == 1
    assert (out / "part_0000.obj").exists()
    assert (out / "manifest.json").exists()


def test_decompose_evaluate_bench_chain(workspace):
    tmp_path, mesh_path, regions_path = workspace
    out = tmp_path / "parts"
    result = run(["decompose", mesh_path, "--regions", regions_path, "-o", out])
    assert result.exit_code == 0, result.output
    payload = json.loads(result.stdout)
    assert payload["exact_meshes"] == 1

    result = run(["evaluate", mesh_path, "--parts", out,
                  "--regions", regions_path, "-n", 4000])
    assert result.exit_code == 0, result.output
    report = json.loads(result.stdout)
    assert report["regions"][0]["region_id"] == "notch"
    assert report["overall"] <= 1e-6

    result = run(["bench", "--parts", out, "--steps", 3])
    assert result.exit_code == 0, result.output
    perf = json.loads(result.stdout)
    assert perf["total_narrowphase_queries"] > 0


def test_decompose_output_deterministic(workspace):
    tmp_path, mesh_path, regions_path = workspace
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        result = run(["decompose", mesh_path, "--regions", regions_path,
                      "--seed", 0, "-o", out])
        assert result.exit_code == 0
        outs.append(out)
    files = sorted(p.name for p in outs[0].iterdir())
    assert files == sorted(p.name for p in outs[1].iterdir())
    for name in files:
        if name == "manifest.json":
            continue   # contains wall-clock stats; compared structurally below
        assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
    manifests = [json.loads((out / "manifest.json").read_text()) for out in outs]
    for m in manifests:
        m["stats"].pop("wall_time_s", None)
    assert manifests[0] == manifests[1]


def test_validation_error_exits_2(workspace, tmp_path):
    tmp_path, mesh_path, regions_path = workspace
    bad_regions = tmp_path / "bad.json"
    bad_regions.write_text(json.dumps({"regions": [
        {"id": "a", "min": [0, 0, 0], "max": [1.5, 1, 1], "tolerance": 0.1},
        {"id": "b", "min": [1, 0, 0], "max": [2, 1, 1], "tolerance": 0.1},
    ]}))
    result = run(["decompose", mesh_path, "--regions", bad_regions,
                  "-o", tmp_path / "out"])
    assert result.exit_code == 2


def test_open_mesh_exits_2_with_json_error(tmp_path):
    mesh_path = tmp_path / "open.obj"
    mesh_path.write_text("v 0 0 0\nv 1 0 0\nv 0 1 0\nf 1 2 3\n")
    result = run(["decompose", mesh_path, "-o", tmp_path / "out",
                  "--json-errors"])
    assert result.exit_code == 2
    payload = json.loads(result.stderr.strip().splitlines()[-1])
    assert payload["error"] == "NotWatertight"


def test_missing_parts_dir_fails(workspace):
    tmp_path, mesh_path, regions_path = workspace
    result = run(["evaluate", mesh_path, "--parts", tmp_path / "nope",
                  "--regions", regions_path])
    assert result.exit_code == 2
