import json
import shutil

from click.testing import CliRunner

from taxoeval.cli import main

DOC = {
    "name": "Survey",
    "subtopics": [
        {"name": "A", "papers": ["p1", "p2", "p3", "p4"]},
        {"name": "B", "papers": ["p5", "p6"]},
    ],
}

BAD_DOC = {
    "name": "Survey",
    "subtopics": [{"name": "A", "papers": ["p1"], "subtopics": []}],
    "papers": ["p1"],
}


def _prepare(tmp_path):
    expert = tmp_path / "expert"
    expert.mkdir()
    (expert / "s1.json").write_text(json.dumps(DOC), encoding="utf-8")
    model = tmp_path / "model"
    shutil.copytree(expert, model)
    return expert, model


class TestEvaluateCommand:
    def test_self_evaluation_writes_report_and_csv(self, tmp_path):
        expert, model = _prepare(tmp_path)
        out = tmp_path / "report.json"
        csv_out = tmp_path / "report.csv"
        result = CliRunner().invoke(
            main,
            ["evaluate", "--mode", "bottom-up", "--expert", str(expert),
             "--model", str(model), "--encoder", "test",
             "--out", str(out), "--csv", str(csv_out)],
        )
        assert result.exit_code == 0, result.output
        payload = json.loads(out.read_text())
        assert payload["per_survey"]["s1"]["ari"] == 1.0
        assert payload["config"]["lambda"] == 1.0
        assert csv_out.exists()

    def test_partial_failure_exits_2(self, tmp_path):
        expert, model = _prepare(tmp_path)
        (expert / "s2.json").write_text(json.dumps(DOC), encoding="utf-8")
        out = tmp_path / "report.json"
        result = CliRunner().invoke(
            main,
            ["evaluate", "--mode", "bottom-up", "--expert", str(expert),
             "--model", str(model), "--out", str(out)],
        )
        assert result.exit_code == 2
        assert json.loads(out.read_text())["errors"]["s2"]

    def test_bad_threshold_is_fatal(self, tmp_path):
        expert, model = _prepare(tmp_path)
        result = CliRunner().invoke(
            main,
            ["evaluate", "--mode", "bottom-up", "--expert", str(expert),
             "--model", str(model), "--threshold", "0",
             "--out", str(tmp_path / "r.json")],
        )
        assert result.exit_code == 1

    def test_lambda_and_parse_flags_echoed(self, tmp_path):
        expert, model = _prepare(tmp_path)
        out = tmp_path / "report.json"
        result = CliRunner().invoke(
            main,
            ["evaluate", "--mode", "deep-research", "--expert", str(expert),
             "--model", str(model), "--lambda", "2.5", "--parse", "strict",
             "--threshold", "0.7", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        config = json.loads(out.read_text())["config"]
        assert config["lambda"] == 2.5
        assert config["parse_mode"] == "strict"
        assert config["alignment_threshold"] == 0.7


class TestPerturbCommand:
    def test_shuffle_idempotent_for_fixed_seed(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps(DOC), encoding="utf-8")
        outputs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            result = CliRunner().invoke(
                main,
                ["perturb", "--in", str(src), "--kind", "sibling-shuffle",
                 "--seed", "7", "--out", str(out)],
            )
            assert result.exit_code == 0, result.output
            outputs.append(out.read_bytes())
        assert outputs[0] == outputs[1]

    def test_rewire_on_counterexample_tree(self, tmp_path):
        tree = {
            "name": "R",
            "subtopics": [
                {"name": "A", "subtopics": [
                    {"name": "B", "papers": []}, {"name": "C", "papers": []}]},
                {"name": "D", "subtopics": [
                    {"name": "E", "papers": []}, {"name": "F", "papers": []}]},
            ],
        }
        src = tmp_path / "t.json"
        src.write_text(json.dumps(tree), encoding="utf-8")
        out = tmp_path / "out.json"
        result = CliRunner().invoke(
            main,
            ["perturb", "--in", str(src), "--kind", "rewire-swap",
             "--path", "R/A/C", "--path-b", "R/D/E", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        swapped = json.loads(out.read_text())
        assert [c["name"] for c in swapped["subtopics"][0]["subtopics"]] == ["B", "E"]
        assert [c["name"] for c in swapped["subtopics"][1]["subtopics"]] == ["C", "F"]

    def test_contract_root_fails(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps(DOC), encoding="utf-8")
        result = CliRunner().invoke(
            main,
            ["perturb", "--in", str(src), "--kind", "contract-node",
             "--path", "Survey", "--out", str(tmp_path / "o.json")],
        )
        assert result.exit_code != 0

    def test_split_leaf(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps(DOC), encoding="utf-8")
        out = tmp_path / "o.json"
        result = CliRunner().invoke(
            main,
            ["perturb", "--in", str(src), "--kind", "split-leaf",
             "--path", "Survey/A", "--parts", "2", "--out", str(out)],
        )
        assert result.exit_code == 0, result.output
        node = json.loads(out.read_text())["subtopics"][0]
        assert len(node["subtopics"]) == 2


class TestValidateCommand:
    def test_valid_file(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps(DOC), encoding="utf-8")
        result = CliRunner().invoke(main, ["validate", "--in", str(src)])
        assert result.exit_code == 0
        assert "ok" in result.output

    def test_violations_listed(self, tmp_path):
        src = tmp_path / "t.json"
        src.write_text(json.dumps(BAD_DOC), encoding="utf-8")
        result = CliRunner().invoke(main, ["validate", "--in", str(src)])
        assert result.exit_code == 1
        assert "dual-role" in result.output
        assert "duplicate-paper" in result.output
