import json

import numpy as np
import pytest

from handeye_sdp.cli import EXIT_ERROR, EXIT_OK, EXIT_UNCERTIFIED, main
from handeye_sdp.constraints import ConstraintConfig
from handeye_sdp.geometry import RigidTransform, rotation_geodesic_error
from handeye_sdp.io import write_dataset, write_json
from handeye_sdp.problem import EgomotionDataset
from handeye_sdp.sdp import calibrate
from handeye_sdp.synth import degenerate_trajectory, derive_egomotion, random_extrinsic

from conftest import make_instance


def _run(argv, out):
    code = main(argv + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def test_gen_then_calibrate_matches_ground_truth(tmp_path):
    data_path = tmp_path / "d.json"
    assert main(["gen", "--seed", "4", "--out", str(data_path)]) == EXIT_OK
    assert (tmp_path / "d.trajectory.json").exists()
    code, res = _run(["calibrate", str(data_path)], tmp_path / "r.json")
    assert code == EXIT_OK and res["certificate"]["certified"]
    assert res["error"]["rot_err_rad"] < 1e-6 and res["error"]["trans_err"] < 1e-6
    assert res["error"]["scale_err"] < 1e-6
    assert len(res["quaternion"]) == 4 and "dual" in res


def test_gen_is_deterministic(tmp_path):
    for name in ("a.json", "b.json"):
        main(["gen", "--seed", "9", "--out", str(tmp_path / name)])
    assert (tmp_path / "a.json").read_bytes() == (tmp_path / "b.json").read_bytes()


def test_gen_with_config(tmp_path):
    cfg = tmp_path / "g.json"
    write_json(cfg, {"noise": {"translation_sigma": 1.0, "rotation_sigma": 0.01},
                     "scale_range": [0.1, 0.1]})
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "d.json")]) == EXIT_OK
    obj = json.loads((tmp_path / "d.json").read_text())
    assert obj["meta"]["ground_truth"]["alpha"] == pytest.approx(0.1)


def test_known_scale_flag(tmp_path):
    path = tmp_path / "d.json"
    write_dataset(path, make_instance(3, scale_range=None))
    _, a = _run(["calibrate", str(path)], tmp_path / "a.json")
    code, b = _run(["calibrate", str(path), "--known-scale", "--constraints", "R"], tmp_path / "b.json")
    assert code == EXIT_OK and b["scale"] is None
    assert rotation_geodesic_error(np.array(a["rotation"]), np.array(b["rotation"])) < 1e-6


def test_small_scale_recovered(tmp_path):
    path = tmp_path / "d.json"
    write_dataset(path, make_instance(3, scale_range=(0.1, 0.1)))
    code, res = _run(["calibrate", str(path)], tmp_path / "r.json")
    assert code == EXIT_OK and res["scale"] == pytest.approx(0.1, abs=1e-6)


def test_uncertified_exit_code(tmp_path):
    for seed in range(50):
        data = make_instance(seed, translation_pct=1.0, rotation_sigma=0.3)
        if not calibrate(data, ConstraintConfig.from_label("R")).certified:
            break
    else:
        pytest.skip("no uncertified instance found")
    path = tmp_path / "d.json"
    write_dataset(path, data)
    code, res = _run(["calibrate", str(path), "--constraints", "R"], tmp_path / "r.json")
    assert code == EXIT_UNCERTIFIED and res["certificate"]["reasons"]


def test_baseline_command(tmp_path):
    path = tmp_path / "d.json"
    write_dataset(path, make_instance(2))
    code, res = _run(["baseline", str(path)], tmp_path / "r.json")
    assert code == EXIT_OK and res["method"] == "linear" and "certificate" not in res
    assert res["error"]["rot_err_rad"] < 1e-6


def test_identity_dataset_errors(tmp_path, caplog):
    I = np.tile(np.eye(3), (6, 1, 1))
    path = tmp_path / "d.json"
    write_dataset(path, EgomotionDataset(I, np.zeros((6, 3)), I, np.zeros((6, 3))))
    assert main(["baseline", str(path)]) == EXIT_ERROR
    assert main(["calibrate", str(path)]) == EXIT_ERROR
    assert "ill-conditioned" in caplog.text


@pytest.mark.parametrize("reference", ["estimate", "identity", "ground-truth"])
def test_check_command(tmp_path, reference):
    good = tmp_path / "good.json"
    write_dataset(good, make_instance(1))
    code, rep = _run(["check", str(good), "--reference", reference], tmp_path / "r.json")
    assert code == EXIT_OK and rep["ok"]

    rng = np.random.default_rng(0)
    bad = tmp_path / "bad.json"
    write_dataset(bad, derive_egomotion(degenerate_trajectory("single_axis", 20, rng), random_extrinsic(rng)))
    code, rep = _run(["check", str(bad), "--reference", reference], tmp_path / "r2.json")
    assert code == EXIT_UNCERTIFIED and not rep["ok"] and rep["messages"]


def test_missing_input_is_an_error(tmp_path):
    assert main(["calibrate", str(tmp_path / "nope.json")]) == EXIT_ERROR


def test_stdout_output(tmp_path, capsys):
    path = tmp_path / "d.json"
    write_dataset(path, make_instance(2))
    assert main(["calibrate", str(path)]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["certificate"]["certified"]


def test_experiment_command(tmp_path):
    cfg = tmp_path / "e.json"
    write_json(cfg, {"trials": 2, "noise_levels": [0.0, 1.0], "constraint_configs": ["R", "RCH"],
                     "methods": ["dual_sdp", "linear"]})
    out = tmp_path / "x.csv"
    assert main(["experiment", str(cfg), "--out", str(out), "--no-timing"]) == EXIT_OK
    lines = out.read_text().splitlines()
    assert lines[0].startswith("trial,noise_pct,rot_sigma,constraints,method,certified,gap")
    assert len(lines) == 1 + 2 * 2 * 3
    summary = json.loads((tmp_path / "x.summary.json").read_text())
    assert len(summary["cells"]) == 6
    write_json(cfg, {"trials": 2, "bogus": 1})
    assert main(["experiment", str(cfg), "--out", str(out)]) == EXIT_ERROR
