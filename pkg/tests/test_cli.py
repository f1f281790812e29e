import json

from click.testing import CliRunner

from worldtalk.cli import main
from worldtalk.worlds import asset_text


def test_worlds_command():
    result = CliRunner().invoke(main, ["worlds"])
    assert result.exit_code == 0
    for world_id in ("tug-of-war", "kinship", "scenes-static", "scenes-physics", "agents"):
        assert world_id in result.output


def test_check_command_single_world():
    result = CliRunner().invoke(main, ["check", "--world", "tug-of-war", "--seeds", "400"])
    assert result.exit_code == 0, result.output
    assert "mean player strength" in result.output
    assert "FAIL" not in result.output


def test_run_script_and_exit_codes(tmp_path):
    runner = CliRunner()
    script = tmp_path / "rematch.json"
    script.write_text(asset_text("dialogues/tow_rematch.dialogue.json"))
    out = tmp_path / "out.json"
    result = runner.invoke(
        main, ["run", str(script), "-o", str(out), "--persist-dir", str(tmp_path / "s")]
    )
    assert result.exit_code == 0, result.output
    record = json.loads(out.read_text())
    assert len(record["entries"]) == 4

    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"world": "chess", "seed": 0, "utterances": []}))
    result = runner.invoke(main, ["run", str(bad), "--persist-dir", str(tmp_path / "s2")])
    assert result.exit_code == 2


def test_repl_condition_query_and_usage(tmp_path):
    runner = CliRunner()
    lines = [
        "C: Josh faced off against Lio and won.",
        "(query (strength 'josh))",
        "huh?",
        "",
    ]
    result = runner.invoke(
        main,
        ["repl", "--world", "tug-of-war", "--seed", "3", "--target", "120", "--max-attempts", "30000", "--chains", "1"],
        input="\n".join(lines),
    )
    assert result.exit_code == 0, result.output
    assert "(condition (won-against '(josh) '(lio)))" in result.output
    assert "mean=" in result.output
    assert "usage:" in result.output


def test_repl_expert_mode_survives_errors():
    result = CliRunner().invoke(
        main,
        ["repl", "--world", "tug-of-war", "--seed", "3", "--chains", "1"],
        input="(condition (beats 'a 'b))\n\n",
    )
    assert result.exit_code == 0
    assert "error:" in result.output
