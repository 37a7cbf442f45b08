import json
import os

import pytest

from SurfaceScope.io.data_tools import graph_to_dict, read_mesh, write_json, write_mesh, write_moves
from SurfaceScope.main import main
from SurfaceScope.models.model_surface import named_spec
from SurfaceScope.models.moves import MoveLog
from SurfaceScope.utils.errors import ConsistencyError


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def _report(capsys, *argv):
    code, out = _run(capsys, *argv)
    return code, json.loads(out)


@pytest.fixture
def band_file(tmp_path, k5_band):
    path = str(tmp_path / "band.json")
    write_mesh(path, k5_band)
    return path


def test_check_tight_passes_on_a_tower_stage(tmp_path, capsys):
    code, report = _report(capsys, "build", "--named", "plane", "--depth", "2", "--out", str(tmp_path / "t"))
    assert code == 0
    assert len(report["files"]) == 3
    for path in report["files"]:
        for method in ("exhaustive", "flow"):
            code, verdict = _report(capsys, "check", "tight", path, "--method", method)
            assert code == 0
            assert verdict["status"] == "tight"


def test_check_tight_fails_on_a_dense_mesh(band_file, capsys):
    code, verdict = _report(capsys, "check", "tight", band_file)
    assert code == 1
    assert verdict["deficiency"] == 1
    assert verdict["witness"] == [1, 2, 3, 4, 5]


def test_check_girth(band_file, capsys):
    code, verdict = _report(capsys, "check", "girth", band_file)
    assert code == 1
    assert verdict["witness"]["delta"] < 0


def test_check_rigid_on_the_double_banana(tmp_path, capsys, banana):
    path = str(tmp_path / "banana.json")
    write_json(path, graph_to_dict(banana))
    code, report = _report(capsys, "check", "rigid", path)
    assert code == 1
    assert report["dof"] == 1
    assert report["rank"] == 17


def test_check_rigid_names_a_redundant_edge(tmp_path, capsys, k5):
    path = str(tmp_path / "k5.json")
    write_json(path, graph_to_dict(k5))
    code, report = _report(capsys, "check", "rigid", path, "--seed", "3")
    assert code == 1
    assert report["redundant_edge"] == [0, 1]
    assert report["seed"] == 3


def test_repair(band_file, tmp_path, capsys):
    out = str(tmp_path / "repaired.json")
    code, report = _report(capsys, "repair", band_file, "--out", out, "--max-moves", "200")
    assert code == 0
    assert report["ok"]
    assert report["f"] == 6
    assert os.path.exists(str(tmp_path / "repaired.moves.json"))
    code, verdict = _report(capsys, "check", "tight", out, "--method", "flow")
    assert code == 0


def test_repair_budget(band_file, capsys):
    code, report = _report(capsys, "repair", band_file, "--max-moves", "0")
    assert code == 3
    assert not report["ok"]


def test_invariants(band_file, capsys):
    code, report = _report(capsys, "invariants", band_file)
    assert code == 0
    assert report["g_r"] == "1/2"
    assert report["boundary_lengths"] == [6]
    assert report["orientable"] is False


def test_rank_echoes_seed_and_prime(band_file, capsys):
    code, report = _report(capsys, "rank", band_file, "--seed", "5", "--prime", str(2**31 - 1))
    assert code == 0
    assert report["seed"] == 5
    assert report["prime"] == 2**31 - 1


def test_replay(tmp_path, capsys, disc_mesh):
    mesh_path = str(tmp_path / "disc.json")
    write_mesh(mesh_path, disc_mesh)
    log = MoveLog()
    (hole,) = disc_mesh.holes
    expected = log.apply(disc_mesh, "collar", hole=hole)
    log_path = str(tmp_path / "moves.json")
    write_moves(log_path, log)
    out = str(tmp_path / "after.json")
    code, _ = _run(capsys, "replay", mesh_path, log_path, "--out", out)
    assert code == 0
    assert read_mesh(out).to_json() == expected.to_json()
    code, text = _run(capsys, "replay", mesh_path, log_path)
    assert text.strip() == expected.to_json()


def test_export(band_file, capsys):
    code, text = _run(capsys, "export", band_file, "--format", "dot")
    assert code == 0
    assert text.startswith("graph G {")
    code, document = _report(capsys, "export", band_file)
    assert document["format"] == "srs-mesh/1"


def test_classify(tmp_path, capsys):
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(named_spec("loch-ness").to_dict()), encoding="utf-8")
    code, report = _report(capsys, "classify", "--spec", str(path))
    assert code == 0
    assert report["genus"] == "infinite"
    code, report = _report(capsys, "classify", "--named", "cantor-tree")
    assert report["ends"] == "Cantor"


def test_schwarz(capsys):
    code, report = _report(capsys, "schwarz", "--m", "2")
    assert code == 0
    sizes = report["sizes"]
    assert [size["f"] for size in sizes] == [size["f_predicted"] for size in sizes]
    assert sizes[-1]["status"] == "violating"
    assert report["nondecreasing"]


def test_usage_errors(tmp_path, capsys):
    assert _run(capsys, "classify", "--named", "klein-bottle")[0] == 2
    assert _run(capsys, "classify")[0] == 2
    assert _run(capsys, "invariants", str(tmp_path / "missing.json"))[0] == 2
    broken = tmp_path / "broken.json"
    broken.write_text("[", encoding="utf-8")
    assert _run(capsys, "check", "tight", str(broken))[0] == 2
    with pytest.raises(SystemExit) as error:
        main(["check", "shiny", str(broken)])
    assert error.value.code == 2


def test_exhaustive_budget_exit_code(tmp_path, capsys):
    path = str(tmp_path / "big.json")
    write_json(path, {"vertices": list(range(25)), "edges": [[i, i + 1] for i in range(24)]})
    assert _run(capsys, "check", "tight", path, "--method", "exhaustive")[0] == 3


def test_consistency_failures_have_their_own_exit_code(band_file, capsys, monkeypatch):
    def broken(mesh):
        raise ConsistencyError("face walk identity fails")

    monkeypatch.setattr("SurfaceScope.main.surface_invariants", broken)
    assert _run(capsys, "invariants", band_file)[0] == 4
