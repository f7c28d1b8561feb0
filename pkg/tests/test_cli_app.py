import json

import pytest

from models import RunRecord


def mat(size, base):
    return {"kind": "Mat", "size": size, "base": base}


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="instance.json"):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)

    return write


def test_relations_pass(runner):
    result = runner.invoke(args=["relations", "--samples", "5"])
    assert result.exit_code == 0, result.output
    assert "relations: pass" in result.output


def test_relations_mutation_fails(runner):
    result = runner.invoke(args=["relations", "--mutate", "drop-product", "--exhaustive", "--samples", "20"])
    assert result.exit_code == 1, result.output
    assert "relations: fail" in result.output


def test_malformed_config_exits_with_usage_error(runner, write_config):
    result = runner.invoke(args=["relations", "--config", write_config('{"samples": ')])
    assert result.exit_code == 2
    assert "malformed JSON" in result.output


def test_unknown_config_key(runner, write_config):
    result = runner.invoke(args=["relations", "--config", write_config({"sampels": 3})])
    assert result.exit_code == 2
    assert "sampels" in result.output


def test_gauss_element(runner, write_config):
    path = write_config({"ring": mat(2, {"kind": "Zmod", "m": 2}), "samples": 10})
    result = runner.invoke(args=["gauss", "--config", path, "--element", "[[0,1],[1,0]]"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(args=["gauss", "--config", path, "--element", "[[1,1],[1,1]]"])
    assert result.exit_code == 1, result.output
    result = runner.invoke(args=["gauss", "--config", path, "--element", "[[1,1]"])
    assert result.exit_code == 2


def test_crossed_module(runner, write_config):
    path = write_config({"ring": mat(3, {"kind": "Zmod", "m": 4})})
    result = runner.invoke(args=["crossed-module", "--config", path, "--samples", "4"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(args=["crossed-module", "--config", path, "--samples", "10",
                                 "--inject-fault", "drop-diagonal"])
    assert result.exit_code == 1, result.output


def test_tower(runner, write_config):
    path = write_config({"ring": mat(3, {"kind": "Zmod", "m": 12}), "scale": 2, "k_max": 4})
    result = runner.invoke(args=["tower", "--config", path, "--samples", "4"])
    assert result.exit_code == 0, result.output
    assert "tower: pass" in result.output
    result = runner.invoke(args=["tower", "--config", path, "--samples", "20", "--mutate", "drop-product"])
    assert result.exit_code == 1, result.output


def test_tower_zero_localization_warns(runner, write_config):
    path = write_config({"ring": mat(3, {"kind": "Zmod", "m": 8}), "scale": 2, "k_max": 2})
    result = runner.invoke(args=["tower", "--config", path, "--samples", "2"])
    assert result.exit_code == 0, result.output
    assert "tower: warn" in result.output


def test_runs_are_indexed_and_served(app, runner, client, write_config):
    path = write_config({"ring": mat(2, {"kind": "Zmod", "m": 2}), "samples": 5})
    assert runner.invoke(args=["gauss", "--config", path, "--seed", "3"]).exit_code == 0

    with app.app_context():
        record = RunRecord.query.one()
        assert record.command == "gauss"
        assert record.seed == 3
        assert record.verdict == "pass"

    summary = client.get("/").get_json()
    assert summary["runs"] == 1
    assert summary["verdicts"] == {"pass": 1}

    runs = client.get("/runs?command=gauss").get_json()["runs"]
    assert [r["id"] for r in runs] == [1]
    assert client.get("/runs?command=tower").get_json()["runs"] == []

    detail = client.get("/runs/1").get_json()
    assert detail["report"]["seed"] == 3
    assert detail["report"]["verdict"] == "pass"

    report = client.get("/runs/1/report")
    assert report.status_code == 200
    assert json.loads(report.data)["command"] == "gauss"

    assert client.get("/runs/999").status_code == 404
