import json
import shutil

import pytest

from dcop_coord import bench
from dcop_coord.bench import CampaignSpec, parse_seed_range, resolve_workers, run_campaign
from dcop_coord.metrics import read_records

STRATS = [
    {"strategy": "k1"},
    {"strategy": "kall"},
    {"strategy": "kada"},
    {"strategy": "dsa", "alpha": 0.9, "epsilon": 0.0},
]


def small_spec(out_dir, **kw):
    base = dict(
        n_values=[10], n_sol_values=[3], seeds=[0, 1, 2], out_dir=str(out_dir),
        strategies=STRATS, runs=3, max_iterations=3000,
    )
    base.update(kw)
    return CampaignSpec(**base)


def test_parse_seed_range():
    assert parse_seed_range("4") == [4]
    assert parse_seed_range("0..3") == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        parse_seed_range("5..2")


def test_spec_validation():
    with pytest.raises(ValueError):
        CampaignSpec([], [3], [0], "x")
    with pytest.raises(ValueError):
        CampaignSpec([10], [3], [0], "x", runs=0)
    with pytest.raises(ValueError):
        CampaignSpec([10], [3], [0], "x", strategies=[{"strategy": "dsa"}, {"strategy": "dsa", "alpha": 0.7}])
    ok = CampaignSpec([10], [3], [0], "x", strategies=[
        {"strategy": "dsa"}, {"strategy": "dsa", "alpha": 0.7, "label": "dsa_a0.7"},
    ])
    assert len(ok.strategies) == 2


def test_grid_sizes():
    paper = CampaignSpec.paper("x")
    assert len(paper.grid()) == 1200
    assert paper.runs == 100 and len(paper.strategies) == 4
    desk = CampaignSpec.desk("x")
    assert len(desk.grid()) == 80
    assert len(desk.grid()) * desk.runs * len(desk.strategies) == 6400


def test_from_dict_seed_string():
    spec = CampaignSpec.from_dict({"n_values": [10], "n_sol_values": [3], "seeds": "0..4", "out_dir": "x"})
    assert spec.seeds == [0, 1, 2, 3, 4]


def test_campaign_outputs(tmp_path):
    manifest = run_campaign(small_spec(tmp_path))
    for name in ("manifest.json", "records.csv", "report.csv", "report.json"):
        assert (tmp_path / name).exists()
    records = read_records(tmp_path / "records.csv")
    assert len(records) == 3 * 4 * 3
    keys = [(r.strategy, r.instance_seed, r.run_index) for r in records]
    assert len(set(keys)) == len(keys)
    assert len(manifest["instances"]) == 3
    assert all(e["status"] == "ok" and e["count"] >= 3 for e in manifest["instances"])
    assert json.loads((tmp_path / "manifest.json").read_text()) == manifest
    for unit in manifest["runs"]:
        assert (tmp_path / unit["file"]).exists()


def test_rerun_is_noop(tmp_path, monkeypatch):
    run_campaign(small_spec(tmp_path))
    before = (tmp_path / "records.csv").read_bytes()

    def boom(*a, **k):
        raise AssertionError("work redone")

    monkeypatch.setattr(bench, "run_coordination", boom)
    monkeypatch.setattr(bench, "generate_instance", boom)
    monkeypatch.setattr(bench, "enumerate_solutions", boom)
    run_campaign(small_spec(tmp_path))
    assert (tmp_path / "records.csv").read_bytes() == before


def test_interrupted_campaign_resumes_identically(tmp_path, monkeypatch):
    clean, broken = tmp_path / "clean", tmp_path / "broken"
    run_campaign(small_spec(clean))

    real = bench.run_unit
    calls = {"n": 0}

    def flaky(*args):
        calls["n"] += 1
        if calls["n"] == 5:
            raise KeyboardInterrupt
        return real(*args)

    monkeypatch.setattr(bench, "run_unit", flaky)
    with pytest.raises(KeyboardInterrupt):
        run_campaign(small_spec(broken))
    assert not (broken / "records.csv").exists()
    monkeypatch.setattr(bench, "run_unit", real)
    run_campaign(small_spec(broken))
    assert (broken / "records.csv").read_bytes() == (clean / "records.csv").read_bytes()
    assert (broken / "report.csv").read_bytes() == (clean / "report.csv").read_bytes()


def test_partial_unit_file_is_ignored(tmp_path):
    run_campaign(small_spec(tmp_path))
    before = (tmp_path / "records.csv").read_bytes()
    unit = next((tmp_path / "runs" / "kall").glob("*.csv"))
    unit.unlink()
    unit.with_name(unit.name + ".tmp").write_text("garbage")
    run_campaign(small_spec(tmp_path))
    assert (tmp_path / "records.csv").read_bytes() == before


def test_unranked_instance_still_runs(tmp_path):
    manifest = run_campaign(small_spec(tmp_path, seeds=[0], enum_limit=1, strategies=STRATS[:2]))
    (entry,) = manifest["instances"]
    assert entry["status"] == "unranked" and "LimitExceeded" in entry["error"]
    records = read_records(tmp_path / "records.csv")
    assert len(records) == 6
    assert all(r.rank is None and r.regret_pct is None for r in records)


def test_exhaustion_recorded_not_raised(tmp_path):
    spec = CampaignSpec([2], [3], [0, 1], str(tmp_path), n_d=1, strategies=STRATS[:1], runs=1)
    manifest = run_campaign(spec)
    assert all(e["status"] == "error" for e in manifest["instances"])
    assert "DistinctSolutionExhaustion" in manifest["instances"][0]["error"]
    assert manifest["runs"] == []


def test_worker_pool_matches_sequential(tmp_path):
    seq, par = tmp_path / "seq", tmp_path / "par"
    run_campaign(small_spec(seq, strategies=STRATS[1:3]), workers=1)
    run_campaign(small_spec(par, strategies=STRATS[1:3]), workers=2)
    assert (seq / "records.csv").read_bytes() == (par / "records.csv").read_bytes()


def test_workers_env_override(monkeypatch):
    monkeypatch.delenv(bench.WORKERS_ENV, raising=False)
    assert resolve_workers(None) == 1
    assert resolve_workers(3) == 3
    monkeypatch.setenv(bench.WORKERS_ENV, "5")
    assert resolve_workers(3) == 5


def test_campaign_determinism_across_directories(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_campaign(small_spec(a))
    run_campaign(small_spec(b))
    assert (a / "records.csv").read_bytes() == (b / "records.csv").read_bytes()
    for f in (a / "instances").iterdir():
        assert f.read_bytes() == (b / "instances" / f.name).read_bytes()
    shutil.rmtree(a / "runs")
    run_campaign(small_spec(a))
    assert (a / "records.csv").read_bytes() == (b / "records.csv").read_bytes()
