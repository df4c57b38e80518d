"""
Tests for the command-line driver
"""

import json
import re

import pytest

from cli.app import build_parser, main
from core.database import DatabaseManager
from attack.adversary import mitm_strategy
from conftest import GOLDEN_KEYS, GOLDEN_MASKS

TRANSCRIPT_LINE = re.compile(r"^\d+\. ")


def transcript_lines(text):
    return [line for line in text.splitlines() if TRANSCRIPT_LINE.match(line)]


class TestRun:

    def test_honest(self, capsys):
        assert main(["run", "--scenario", "honest", "--L", "8", "--seed", "7", "--message", "0"]) == 0
        out = capsys.readouterr().out
        assert len(transcript_lines(out)) == 6
        assert "B: accept 0 " in out
        assert "C: accept 0 " in out
        assert out.splitlines()[0] == "# scenario=honest L=8 m=0 policy=exact seed=7"
        assert out.endswith("verdict: consistent\n")

    def test_attack(self, capsys):
        assert main(["run", "--scenario", "attack-b", "--L", "8", "--seed", "7", "--message", "0"]) == 0
        out = capsys.readouterr().out
        assert len(transcript_lines(out)) == 11
        assert "B: accept 1 " in out
        assert "C: accept 0 " in out

    def test_attack_on_charlie(self, capsys):
        assert main(["run", "--scenario", "attack-c", "--L", "4", "--seed", "1", "--message", "1"]) == 0
        out = capsys.readouterr().out
        assert "C: accept 0 " in out
        assert "B: accept 1 " in out
        assert "[swap k0C,k1C]" in out

    def test_both_messages(self, capsys):
        assert main(["run", "--L", "4", "--message", "both"]) == 0
        headers = [line for line in capsys.readouterr().out.splitlines() if line.startswith("# ")]
        assert headers == ["# scenario=honest L=4 m=0 policy=exact seed=0",
                           "# scenario=honest L=4 m=1 policy=exact seed=0"]

    def test_identical_invocations_identical_output(self, capsys):
        argv = ["run", "--scenario", "attack-b", "--L", "16", "--seed", "3", "--output", "structured"]
        main(argv)
        first = capsys.readouterr().out
        main(argv)
        assert capsys.readouterr().out == first

    def test_structured_records(self, capsys):
        main(["run", "--scenario", "attack-b", "--L", "2", "--seed", "3", "--output", "structured"])
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert records[0]["record"] == "run"
        assert records[0]["seed"] == 3
        assert [r["record"] for r in records].count("delivery") == 11
        assert records[-1] == {"record": "verdict", "consistent": True}

    def test_custom_strategy(self, capsys, tmp_path):
        strategy = tmp_path / "mitm.strategy"
        strategy.write_text("# reference attack\n" + mitm_strategy().serialize() + "\n")
        assert main(["run", "--scenario", "custom", "--strategy", str(strategy), "--L", "4"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("# scenario=custom ")
        assert "[restore kpart0B,kpart1B]" in out

    def test_bad_strategy_file_names_the_line(self, capsys, tmp_path):
        strategy = tmp_path / "bad.strategy"
        strategy.write_text("intercept 1 keydist -> swap-keys\nintercept 2 partials -> flip\n")
        assert main(["run", "--scenario", "custom", "--strategy", str(strategy)]) == 2
        assert f"{strategy}:2:" in capsys.readouterr().err

    def test_zero_length_is_a_config_error(self, capsys):
        assert main(["run", "--L", "0"]) == 2
        assert "key length" in capsys.readouterr().err

    def test_bad_policy(self):
        assert main(["run", "--policy", "threshold:2"]) == 2

    def test_forward_on_reject(self, capsys):
        pinned = ["--keys", GOLDEN_KEYS, "--masks", GOLDEN_MASKS]
        assert main(["run", "--scenario", "honest", "--forward-on-reject", *pinned]) == 0
        assert len(transcript_lines(capsys.readouterr().out)) == 6

    def test_results_store(self, capsys, tmp_path):
        url = f"sqlite:///{tmp_path / 'runs.db'}"
        assert main(["run", "--scenario", "attack-b", "--L", "4", "--message", "both", "--db", url]) == 0
        runs = DatabaseManager(url).runs()
        assert [(run.scenario, run.message, run.bob_message) for run in runs] == [
            ("attack-b", 0, 1), ("attack-b", 1, 0),
        ]


class TestSearch:

    def test_default_alphabet_finds_the_mitm_attack(self, capsys):
        assert main(["search", "--L", "1"]) == 0
        out = capsys.readouterr().out
        assert out.splitlines()[0].startswith("# search goal=transferability L=1 policy=exact victim=B")
        assert out.rstrip().endswith("== 2 universal violation(s); reference attack found ==")

    def test_restricted_alphabet_finds_nothing(self, capsys):
        assert main(["search", "--L", "1", "--alphabet", "forward,flip"]) == 3
        assert "== 0 universal violation(s) ==" in capsys.readouterr().out

    def test_unknown_action(self, capsys):
        assert main(["search", "--alphabet", "forward,teleport"]) == 2
        assert "teleport" in capsys.readouterr().err

    def test_structured_forgery(self, capsys):
        assert main(["search", "--goal", "forgery", "--output", "structured"]) == 0
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert records[-1] == {"record": "summary", "violations": 6, "mitm_found": True}
        assert all(r["universal"] for r in records[:-1])

    def test_length_bound(self):
        assert main(["search", "--L", "5"]) == 2


class TestStats:

    def test_mitm_flips_every_trial(self, capsys):
        assert main(["stats", "--strategy", "mitm", "--L", "4", "--trials", "50", "--seed", "1"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "# stats strategy=mitm victim=B L=4 trials=50 seed=1 policy=exact"
        assert lines[2].startswith("victim accept flipped")
        assert "50/50  1.000000" in lines[2]

    def test_exact_rates(self, capsys):
        assert main(["stats", "--strategy", "naive", "--L", "1", "--trials", "10", "--exact"]) == 0
        out = capsys.readouterr().out
        assert "exact 3/8 = 0.375000" in out
        assert "exact 1/4 = 0.250000" in out

    def test_structured(self, capsys):
        assert main(["stats", "--strategy", "proxy", "--L", "2", "--trials", "20", "--output", "structured"]) == 0
        records = [json.loads(line) for line in capsys.readouterr().out.splitlines()]
        assert [r["counter"] for r in records] == ["victim_accept", "victim_accept_flipped", "counterpart_accept"]
        assert [r["count"] for r in records] == [20, 0, 20]

    def test_strategy_file(self, capsys, tmp_path):
        strategy = tmp_path / "flip.strategy"
        strategy.write_text("victim C\nintercept 4 sign -> flip\n")
        assert main(["stats", "--strategy", str(strategy), "--L", "1", "--trials", "5"]) == 0
        assert "victim=C" in capsys.readouterr().out.splitlines()[0]

    def test_zero_trials(self):
        assert main(["stats", "--trials", "0"]) == 2


class TestConfigCommand:

    def test_init_then_show(self, capsys, tmp_path):
        path = tmp_path / "p2sim.json"
        assert main(["config", "init", str(path)]) == 0
        settings = json.loads(path.read_text())
        settings["protocol"]["key_length"] = 3
        path.write_text(json.dumps(settings))
        assert main(["--config", str(path), "config", "show"]) == 0
        assert json.loads(capsys.readouterr().out)["protocol"]["key_length"] == 3

    def test_init_refuses_to_overwrite(self, tmp_path):
        path = tmp_path / "p2sim.json"
        path.write_text("{}")
        assert main(["config", "init", str(path)]) == 2
        assert main(["config", "init", str(path), "--force"]) == 0

    def test_settings_file_feeds_run(self, capsys, tmp_path):
        path = tmp_path / "p2sim.json"
        path.write_text(json.dumps({"protocol": {"key_length": 2}, "run": {"scenario": "attack-b"}}))
        assert main(["--config", str(path), "run"]) == 0
        assert capsys.readouterr().out.startswith("# scenario=attack-b L=2 ")

    def test_flags_win(self, capsys, tmp_path):
        path = tmp_path / "p2sim.json"
        path.write_text(json.dumps({"protocol": {"key_length": 2}}))
        assert main(["--config", str(path), "run", "--L", "3"]) == 0
        assert " L=3 " in capsys.readouterr().out.splitlines()[0]


class TestLogging:

    def test_log_level_flag(self, capsys):
        assert main(["--log-level", "debug", "run", "--L", "2"]) == 0
        err = capsys.readouterr().err
        assert "DEBUG" in err

    def test_log_level_environment(self, capsys, monkeypatch):
        monkeypatch.setenv("P2SIM_LOG_LEVEL", "info")
        assert main(["run", "--L", "2"]) == 0
        assert "INFO" in capsys.readouterr().err

    def test_bad_environment_level(self, monkeypatch):
        monkeypatch.setenv("P2SIM_LOG_LEVEL", "chatty")
        assert main(["run", "--L", "2"]) == 2

    def test_quiet_by_default(self, capsys):
        main(["run", "--L", "2"])
        assert capsys.readouterr().err == ""

    def test_parser_requires_a_command(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestSettingsValidation:

    @pytest.mark.parametrize("settings, argv, field", [
        ({"search": {"key_length": "1"}}, ["search"], "key_length"),
        ({"search": {"workers": "2"}}, ["search"], "workers"),
        ({"search": {"workers": 0}}, ["search"], "workers"),
        ({"stats": {"trials": "10"}}, ["stats", "--L", "2"], "trials"),
        ({"run": {"seed": "3"}}, ["stats", "--L", "2", "--trials", "5"], "seed"),
        ({"protocol": {"key_length": "2"}}, ["run"], "key_length"),
        ({"protocol": {"forward_on_reject": "yes"}}, ["run"], "forward_on_reject"),
    ])
    def test_badly_typed_settings_are_config_errors(self, capsys, tmp_path, settings, argv, field):
        path = tmp_path / "p2sim.json"
        path.write_text(json.dumps(settings))
        assert main(["--config", str(path), *argv]) == 2
        assert field in capsys.readouterr().err

    def test_flag_turns_off_forward_on_reject_from_the_file(self, capsys, tmp_path):
        path = tmp_path / "p2sim.json"
        path.write_text(json.dumps({"protocol": {"forward_on_reject": True}}))
        strategy = tmp_path / "flip.strategy"
        strategy.write_text("intercept 4 sign -> flip\n")
        argv = ["--config", str(path), "run", "--scenario", "custom", "--strategy", str(strategy),
                "--keys", GOLDEN_KEYS, "--masks", GOLDEN_MASKS]
        assert main(argv) == 0
        assert "C: reject " in capsys.readouterr().out
        assert main([*argv, "--no-forward-on-reject"]) == 0
        assert "C: no decision" in capsys.readouterr().out

    def test_length_must_match_pinned_keys(self, capsys):
        pinned = ["--keys", GOLDEN_KEYS, "--masks", GOLDEN_MASKS]
        assert main(["run", "--L", "2", *pinned]) == 2
        assert "pinned keys of length 1" in capsys.readouterr().err
        assert main(["run", "--L", "1", *pinned]) == 0

    def test_env_file_loaded_once(self, monkeypatch):
        calls = []
        monkeypatch.setattr("cli.app.load_dotenv", lambda *args, **kwargs: calls.append(args))
        assert main(["run", "--L", "2"]) == 0
        assert len(calls) == 1
