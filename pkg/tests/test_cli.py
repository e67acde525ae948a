import hashlib
import json
from pathlib import Path

import pytest

from beliefbox.cli import main
from beliefbox.config import apply_overrides, from_mapping, interpolate, load_config
from beliefbox.errors import ConfigError
from beliefbox.predictor import BeliefPredictor, synthetic_corpus, write_examples

SCRIPT = {
    "rules": [
        {"match": {"kind": "reassess", "role": "target"}, "by_round": ["5", "4", "3", "2"]},
        {"match": {"kind": ["reassess", "bfi2"]}, "response": "3"},
        {"match": {"kind": "speak"}, "response": "I hold my view. (A)"},
    ]
}
OUTPUTS = ["config.json", "data_quality.json", "results.csv", "summary.json", "transcripts.jsonl"]


@pytest.fixture
def workdir(tmp_path, aporia_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    (tmp_path / "script.json").write_text(json.dumps(SCRIPT))
    (tmp_path / "run.toml").write_text(
        f'experiment = "persuasion"\n'
        f'dataset = "{aporia_path.as_posix()}"\n'
        "sample_size = 1\nruns = 1\n"
        'conditions = ["p=5"]\n'
        'scripted = "script.json"\n'
        'out = "out"\n'
        "[backend]\n"
        'model = "${BB_TEST_MODEL}"\n'
    )
    return tmp_path


def digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def test_run_writes_five_files(workdir, capsys, monkeypatch):
    monkeypatch.setenv("BB_TEST_MODEL", "interp-model")
    monkeypatch.setenv("BELIEFBOX_API_KEY", "sk-secret")
    before = digest(workdir / "run.toml"), digest(workdir / "script.json")
    assert main(["run", "--config", "run.toml"]) == 0
    assert sorted(p.name for p in (workdir / "out").iterdir()) == OUTPUTS
    assert "mean_belief_score" in capsys.readouterr().out
    echo = (workdir / "out" / "config.json").read_text()
    assert "sk-secret" not in echo
    assert json.loads(echo)["backend"]["model"] == "interp-model"
    assert (digest(workdir / "run.toml"), digest(workdir / "script.json")) == before
    rows = (workdir / "out" / "results.csv").read_text().splitlines()
    assert rows[1] == "persuasion,aporia,p=5,mean_belief_score,1,3.5"


def test_rerun_from_echo_is_byte_identical(workdir):
    assert main(["run", "--config", "run.toml"]) == 0
    assert main(["run", "--config", "out/config.json", "--out", "again"]) == 0
    for name in ("results.csv", "transcripts.jsonl", "summary.json"):
        assert (workdir / "out" / name).read_bytes() == (workdir / "again" / name).read_bytes()


def test_same_seed_same_results(workdir):
    main(["run", "--config", "run.toml", "--seed", "7", "--out", "a"])
    main(["run", "--config", "run.toml", "--seed", "7", "--out", "b"])
    assert (workdir / "a" / "results.csv").read_bytes() == (workdir / "b" / "results.csv").read_bytes()


def test_bad_dataset_fails_without_outputs(workdir, capsys):
    assert main(["run", "--config", "run.toml", "--dataset", "missing.json"]) != 0
    assert not (workdir / "out").exists()
    assert "missing.json" in capsys.readouterr().err


def test_diagnostics_are_module_qualified(workdir, capsys):
    assert main(["run", "--config", "run.toml", "--dataset", "missing.json"]) == 2
    err = capsys.readouterr().err
    assert "DataError" in err and "missing.json" in err


def test_invalid_config_fails_before_backend(workdir, capsys):
    (workdir / "bad.toml").write_text('experiment = "persuasion"\nconcurrency = 0\n')
    assert main(["run", "--config", "bad.toml", "--dataset", "x.json"]) == 2
    assert "concurrency" in capsys.readouterr().err
    (workdir / "typo.toml").write_text("experimnt = 1\n")
    assert main(["run", "--config", "typo.toml"]) == 2


def test_flags_override_file(workdir):
    cfg = load_config(workdir / "run.toml")
    apply_overrides(cfg, {"seed": 9, "backend.temperature": 0.1, "runs": None})
    assert (cfg.seed, cfg.backend.temperature, cfg.runs) == (9, 0.1, 1)


def test_config_helpers(monkeypatch):
    monkeypatch.setenv("BB_X", "val")
    assert interpolate({"a": ["${BB_X}", 1], "b": "pre-${BB_X}"}) == {"a": ["val", 1], "b": "pre-val"}
    with pytest.raises(ConfigError):
        from_mapping({"backend": {"colour": "red"}})
    cfg = from_mapping({"experiment": "bfi2"})
    cfg.validate()
    assert cfg.effective_runs == 3
    with pytest.raises(ConfigError):
        from_mapping({"experiment": "persuasion"}).validate()


def test_bfi2_prints_trait_table(workdir, capsys):
    assert main(["bfi2", "--scripted", "script.json", "--runs", "1"]) == 0
    out = capsys.readouterr().out.splitlines()
    assert out[0].split() == ["trait", "level=1", "level=2", "level=3", "level=4", "level=5"]
    assert out[1].split() == ["open-mindedness", "50.0", "50.0", "50.0", "50.0", "50.0"]


def test_train_and_eval_predictor(tmp_path, capsys):
    write_examples(tmp_path / "ten.jsonl", synthetic_corpus(10, seed=5))
    assert main(["train-predictor", "--examples", str(tmp_path / "ten.jsonl"), "--model-out", str(tmp_path / "m.json")]) == 0
    model = BeliefPredictor.load(tmp_path / "m.json")
    assert model.kind == "ridge"
    assert "split train=7 validation=1 test=2" in capsys.readouterr().out


def test_eval_perfect_model_prints_zero(tmp_path, capsys):
    write_examples(tmp_path / "c.jsonl", synthetic_corpus(200, seed=1))
    main(["train-predictor", "--examples", str(tmp_path / "c.jsonl"), "--regressor", "forest", "--trees", "10",
          "--model-out", str(tmp_path / "f.json")])
    capsys.readouterr()
    assert main(["eval-predictor", "--model", str(tmp_path / "f.json"), "--examples", str(tmp_path / "c.jsonl")]) == 0
    out = capsys.readouterr().out
    assert "MAE 0.000" in out and "baseline MAE" in out


def test_train_on_transcripts(workdir, capsys):
    main(["run", "--config", "run.toml"])
    rc = main(["train-predictor", "--examples", "out/transcripts.jsonl", "--model-out", "m.json", "--granularity", "last_turn"])
    assert rc == 0 and (workdir / "m.json").is_file()


def test_missing_inputs_fail(tmp_path):
    assert main(["eval-predictor", "--model", str(tmp_path / "no.json"), "--examples", str(tmp_path / "no.jsonl")]) != 0
    assert main(["train-predictor", "--examples", str(tmp_path / "no.jsonl"), "--model-out", str(tmp_path / "m.json")]) != 0
    assert main(["report", "--inputs", str(tmp_path / "none"), "--out", str(tmp_path / "r")]) != 0


def test_report_empty_results_fails(tmp_path, capsys):
    (tmp_path / "results.csv").write_text("experiment,dataset,condition,metric,n,value\n")
    assert main(["report", "--inputs", str(tmp_path), "--out", str(tmp_path / "rep")]) != 0
    assert "no result rows" in capsys.readouterr().err


def test_report_tables_and_figures(tmp_path):
    run_a = tmp_path / "pp"
    run_a.mkdir()
    (run_a / "results.csv").write_text(
        "experiment,dataset,condition,metric,n,value\n"
        "peer-pressure,aporia,group_size=1,change_rate,10,0.0\n"
        "peer-pressure,aporia,group_size=3,change_rate,10,1.0\n"
        "peer-pressure,aporia,pooled,pearson_r,20,0.9\n"
        "peer-pressure,aporia,pooled,f_statistic,20,80.0\n"
        "peer-pressure,aporia,pooled,p_value,20,1e-07\n"
        'open-mindedness,aporia,"level=1,direction=misaligned->aligned",change_rate,5,0.2\n'
        "bfi2,bfi2,level=2,score:open-mindedness,4,62.5\n"
    )
    run_b = tmp_path / "pers"
    run_b.mkdir()
    (run_b / "results.csv").write_text(
        "experiment,dataset,condition,metric,n,value\npersuasion,aporia,p=5,mean_belief_score,3,3.5\n"
    )
    out = tmp_path / "rep"
    assert main(["report", "--inputs", str(run_a), str(run_b / "results.csv"), "--out", str(out)]) == 0
    names = sorted(p.name for p in out.iterdir())
    for stem in ("change_rate_by_level", "mean_score_by_condition", "rate_by_group_size", "bfi2_scores"):
        assert f"{stem}.csv" in names and f"{stem}.png" in names
    lines = (out / "rate_by_group_size.csv").read_text().splitlines()
    assert lines[0] == "source,dataset,group_size,n,change_rate,pearson_r,f_statistic,p_value"
    assert lines[1] == "pp,aporia,1,10,0.0,0.9,80.0,1e-07"
    assert (out / "change_rate_by_level.png").read_bytes()[:4] == b"\x89PNG"
