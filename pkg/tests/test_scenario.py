import csv
import json
from collections import defaultdict
from pathlib import Path

import pytest

from bdaeco import World, errors
from bdaeco.cli import main
from bdaeco.scenario import export_reports, load_scenario, parse_scenario, render_reports, run_scenario, RunReport

REFERENCE = "reference"


def _rows(text):
    return list(csv.reader(line for line in text.splitlines() if not line.startswith("#")))


@pytest.fixture(scope="module")
def reference_run():
    return run_scenario(REFERENCE, seed=7)


class TestParse:
    def test_empty(self):
        run = run_scenario(parse_scenario(""), seed=0)
        assert run.command_count == 0
        assert run.final_digest == World(seed=0).state_digest()

    def test_empty_seed_matters(self):
        assert run_scenario(parse_scenario(""), 1).final_digest != run_scenario(parse_scenario(""), 2).final_digest

    @pytest.mark.parametrize(
        "text",
        [
            "{not json",
            '{"seq": 1}',
            '{"seq": 2, "op": "deposit"}\n{"seq": 2, "op": "deposit"}',
            '{"seq": 1, "op": "mint_money"}',
            '{"config": {"turbo": true}}',
            '{"seq": 1, "op": "deposit", "args": [1]}',
            "[1, 2]",
        ],
    )
    def test_parse_errors(self, text):
        with pytest.raises(errors.ParseError):
            parse_scenario(text)

    def test_missing_file(self, tmp_path):
        with pytest.raises(errors.ParseError):
            load_scenario(tmp_path / "nope.jsonl")

    def test_bad_seed(self):
        with pytest.raises(errors.ParseError):
            run_scenario(parse_scenario(""), seed=2**64)

    def test_malformed_args_are_parse_errors(self):
        with pytest.raises(errors.AssertionFailure):
            run_scenario(parse_scenario('{"seq": 1, "op": "deposit", "args": {"bogus": 1}, "expect": "ok"}'))
        run = run_scenario(parse_scenario('{"seq": 1, "op": "deposit", "args": {"bogus": 1}, "expect": "ParseError"}'))
        assert run.rejected[0]["error"] == "ParseError"


class TestExpectations:
    SCRIPT = '{"seq": 1, "op": "register_account", "args": {"role": "Investor", "account_id": "i"}}\n'

    def test_expected_rejection_passes(self):
        text = self.SCRIPT + '{"seq": 2, "op": "register_account", "args": {"role": "Investor", "account_id": "i"}, "expect": "DuplicateAccount"}'
        run = run_scenario(parse_scenario(text), strict=True)
        assert [r["error"] for r in run.rejected] == ["DuplicateAccount"]

    def test_wrong_expectation(self):
        text = self.SCRIPT + '{"seq": 2, "op": "deposit", "args": {"account": "i", "amount": 5}, "expect": "UnknownAccount"}'
        with pytest.raises(errors.AssertionFailure):
            run_scenario(parse_scenario(text))

    def test_untagged_rejection(self):
        text = self.SCRIPT + '{"seq": 2, "op": "deposit", "args": {"account": "ghost", "amount": 5}}'
        assert len(run_scenario(parse_scenario(text)).rejected) == 1
        with pytest.raises(errors.AssertionFailure):
            run_scenario(parse_scenario(text), strict=True)

    def test_must_succeed(self):
        text = self.SCRIPT + '{"seq": 2, "op": "deposit", "args": {"account": "ghost", "amount": 5}, "must_succeed": true}'
        with pytest.raises(errors.AssertionFailure):
            run_scenario(parse_scenario(text))

    def test_rejections_do_not_tick_the_clock(self):
        text = self.SCRIPT + '{"seq": 2, "op": "deposit", "args": {"account": "ghost", "amount": 5}}'
        run = run_scenario(parse_scenario(text))
        assert run.world.clock == 1
        assert len(run.world.log) == 2


class TestReference:
    def test_all_expectations_hold(self, reference_run):
        assert reference_run.command_count == 80
        assert {r["error"] for r in reference_run.rejected} >= {"DuplicateAsset", "PaymentNotFound", "IneligibleRecipient", "StaleInterval"}

    def test_disbursements_resum(self, reference_run):
        world = reference_run.world
        totals = defaultdict(int)
        for pid, cls, acct, amount in _rows(render_reports(world)["disbursements.csv"])[1:]:
            totals[pid] += int(amount)
        distributed = {pid: p.amount for pid, p in world.revenue.payments.items() if p.status.value == "Disbursed"}
        assert dict(totals) == distributed and distributed

    def test_tension_file_per_closed_interval(self, reference_run):
        files = render_reports(reference_run.world)
        tension = sorted(n for n in files if n.startswith("tension_"))
        assert tension == [f"tension_hierarchical_{i:04d}.csv" for i in range(reference_run.world.tension.interval)]
        assert "# classification: BestCase" in files["tension_hierarchical_0001.csv"]

    def test_headers_carry_digest(self, reference_run):
        for name, text in render_reports(reference_run.world).items():
            if name.endswith(".csv"):
                assert text.startswith("# ")
                assert f"state_digest: {reference_run.final_digest}" in text
                assert "hash_algorithm: sha256" in text

    def test_byte_identical_exports(self, tmp_path):
        a = run_scenario(REFERENCE, seed=7)
        b = run_scenario(REFERENCE, seed=7)
        fa = export_reports(a, tmp_path / "a")
        fb = export_reports(b, tmp_path / "b")
        assert sorted(fa) == sorted(fb)
        for name in fa:
            assert fa[name].read_bytes() == fb[name].read_bytes(), name
        again = export_reports(a, tmp_path / "a2")
        assert all(again[n].read_bytes() == fa[n].read_bytes() for n in fa)

    def test_other_seed_other_digest(self, reference_run):
        assert run_scenario(REFERENCE, seed=8).final_digest != reference_run.final_digest

    def test_export_needs_completed_run(self, tmp_path):
        with pytest.raises(errors.IoFailure):
            export_reports(RunReport("", 0, []), tmp_path)

    def test_export_io_failure(self, reference_run, tmp_path):
        blocker = tmp_path / "file"
        blocker.write_text("x")
        with pytest.raises(errors.IoFailure):
            export_reports(reference_run, blocker / "sub")

    def test_run_json(self, reference_run, tmp_path):
        files = export_reports(reference_run, tmp_path)
        summary = json.loads(files["run.json"].read_text())
        assert summary["final_digest"] == reference_run.final_digest
        assert summary["seed"] == 7
        assert "run.json" in summary["report_files"]


class TestCli:
    def test_run(self, tmp_path, capsys):
        assert main(["run", REFERENCE, "--seed", "7", "--out", str(tmp_path)]) == 0
        out = capsys.readouterr().out
        digest = (tmp_path / "state_digest.txt").read_text().split()[-1]
        assert digest in out

    def test_digest(self, capsys, reference_run):
        assert main(["digest", REFERENCE, "--seed", "0x7"]) == 0
        assert capsys.readouterr().out.strip() == reference_run.final_digest

    def test_parse_error_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text("{oops\n")
        assert main(["digest", str(bad)]) == 2
        assert "ParseError" in capsys.readouterr().err

    def test_assertion_failure_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"seq": 1, "op": "deposit", "args": {"account": "ghost", "amount": 1}, "expect": "ok"}\n')
        assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 1
        assert not (tmp_path / "o").exists()

    def test_strict_exit(self, tmp_path):
        path = tmp_path / "s.jsonl"
        path.write_text('{"seq": 1, "op": "deposit", "args": {"account": "ghost", "amount": 1}}\n')
        assert main(["run", str(path), "--out", str(tmp_path / "o")]) == 0
        assert main(["run", str(path), "--out", str(tmp_path / "o"), "--strict"]) == 1

    def test_bundled_file_matches_name(self):
        import bdaeco.scenarios
        path = Path(bdaeco.scenarios.__file__).parent / f"{REFERENCE}.jsonl"
        assert run_scenario(path, 7).final_digest == run_scenario(REFERENCE, 7).final_digest
