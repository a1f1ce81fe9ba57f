import numpy as np
import pytest

from handeye_sdp.experiment import (
    CSV_COLUMNS,
    ExperimentConfig,
    grid,
    records_to_csv,
    run_experiment,
    summarize,
)
from handeye_sdp.io import FormatError

CFG = dict(trials=3, noise_levels=[0.0, 5.0], rotation_sigma=[0.01], constraint_configs=["R", "RCH"],
           methods=["dual_sdp", "linear"], seed=5)


def test_identical_config_gives_identical_csv():
    cfg = ExperimentConfig.from_json(CFG)
    a = records_to_csv(run_experiment(cfg), include_time=False)
    b = records_to_csv(run_experiment(ExperimentConfig.from_json(CFG)), include_time=False)
    assert a == b
    assert a.splitlines()[0].split(",") == CSV_COLUMNS


def test_parallel_matches_serial():
    serial = records_to_csv(run_experiment(ExperimentConfig.from_json(CFG)), include_time=False)
    par = records_to_csv(run_experiment(ExperimentConfig.from_json({**CFG, "workers": 2})),
                         include_time=False)
    assert serial == par


def test_grid_and_summary():
    cfg = ExperimentConfig.from_json(CFG)
    assert len(grid(cfg)) == 2 * 3
    rows = run_experiment(cfg)
    summary = summarize(rows, cfg)
    noise_free = [c for c in summary["cells"] if c["noise_pct"] == 0.0 and c["method"] == "dual_sdp"]
    assert all(c["certified_rate"] == 1.0 for c in noise_free)
    linear = [c for c in summary["cells"] if c["method"] == "linear"]
    assert all(c["certified_rate"] is None and c["constraints"] == "-" for c in linear)
    for c in summary["cells"]:
        assert sum(c["histograms"]["rot_err_rad"]["counts"]) == c["trials"] - c["failures"]
    # the trials in one noise cell share their datasets
    by = {(r.constraints, r.trial): r for r in rows if r.noise_pct == 0.0}
    assert by[("R", 0)].rot_err_rad == pytest.approx(by[("RCH", 0)].rot_err_rad, abs=1e-6)


@pytest.mark.parametrize("bad", [{"trials": 0}, {"noise_levels": [-1.0]}, {"methods": ["magic"]},
                                 {"constraint_configs": ["Q"]}, {"unknown": 1}])
def test_config_validation(bad):
    with pytest.raises(FormatError):
        ExperimentConfig.from_json({**CFG, **bad})


def test_config_json_roundtrip():
    cfg = ExperimentConfig.from_json(CFG)
    assert ExperimentConfig.from_json(cfg.to_json()) == cfg
