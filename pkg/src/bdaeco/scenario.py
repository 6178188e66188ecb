"""Line-delimited JSON scenarios, deterministic replay and report export.

A scenario file holds one JSON object per line.  An optional first line
without ``"op"`` carries world settings::

    {"config": {"fee_rate_bp": 200, "auto_intervals": false}}
    {"seq": 1, "op": "register_account", "args": {"role": "BuildingOwner", "account_id": "alice"}}
    {"seq": 2, "op": "transfer_ownership", "args": {...}, "expect": "IneligibleRecipient"}

``expect`` is ``"ok"`` or an error class name.  ``must_succeed`` aborts the
run on rejection.  Blank lines and lines starting with ``#`` are skipped.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any

from . import errors
from .canonical import HASH_ALGORITHM
from .governance import Choice
from .tension import NUM_CHOICES
from .world import World

log = logging.getLogger(__name__)

SEED_RANGE = (-(2**63), 2**64 - 1)
_CONFIG_KEYS = {"fee_rate_bp", "interval_min", "interval_max", "auto_intervals"}


@dataclass(frozen=True)
class ScenarioCommand:
    seq: int
    op: str
    args: dict[str, Any]
    expect: str | None = None
    must_succeed: bool = False


@dataclass
class Scenario:
    commands: list[ScenarioCommand]
    config: dict[str, Any] = field(default_factory=dict)
    name: str = ""


@dataclass
class RunReport:
    final_digest: str
    command_count: int
    rejected: list[dict[str, Any]]
    hash_algorithm: str = HASH_ALGORITHM
    seed: int = 0
    scenario: str = ""
    report_files: dict[str, str] = field(default_factory=dict)
    completed: bool = False
    world: World | None = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenario": self.scenario,
            "seed": self.seed,
            "hash_algorithm": self.hash_algorithm,
            "final_digest": self.final_digest,
            "command_count": self.command_count,
            "rejected": self.rejected,
            "report_files": dict(sorted(self.report_files.items())),
        }


def parse_scenario(text: str, name: str = "") -> Scenario:
    commands: list[ScenarioCommand] = []
    config: dict[str, Any] = {}
    last_seq = 0
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise errors.ParseError(f"line {lineno}: {exc.msg}") from None
        if not isinstance(record, dict):
            raise errors.ParseError(f"line {lineno}: expected an object")
        if "op" not in record:
            if commands or "config" not in record:
                raise errors.ParseError(f"line {lineno}: missing 'op'")
            config = dict(record["config"])
            unknown = set(config) - _CONFIG_KEYS
            if unknown:
                raise errors.ParseError(f"line {lineno}: unknown config keys {sorted(unknown)}")
            continue
        seq = record.get("seq", last_seq + 1)
        if not isinstance(seq, int) or seq <= last_seq:
            raise errors.ParseError(f"line {lineno}: seq must increase strictly (got {seq!r} after {last_seq})")
        op = record["op"]
        if op not in World.OPERATIONS:
            raise errors.ParseError(f"line {lineno}: unknown operation {op!r}")
        args = record.get("args", {})
        if not isinstance(args, dict):
            raise errors.ParseError(f"line {lineno}: args must be an object")
        commands.append(
            ScenarioCommand(seq, op, args, record.get("expect"), bool(record.get("must_succeed", False)))
        )
        last_seq = seq
    return Scenario(commands, config, name)


def bundled_scenarios() -> list[str]:
    return sorted(p.name[: -len(".jsonl")] for p in resources.files("bdaeco.scenarios").iterdir() if p.name.endswith(".jsonl"))


def load_scenario(path: str | Path) -> Scenario:
    """Read a scenario file; a bare bundled name such as ``reference`` also works."""
    path = Path(path)
    if not path.exists() and str(path) in bundled_scenarios():
        text = resources.files("bdaeco.scenarios").joinpath(f"{path}.jsonl").read_text(encoding="utf-8")
        return parse_scenario(text, f"{path}.jsonl")
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise errors.ParseError(f"cannot read {path}: {exc}") from None
    return parse_scenario(text, path.name)


def check_seed(seed: int) -> int:
    if not isinstance(seed, int) or not SEED_RANGE[0] <= seed <= SEED_RANGE[1]:
        raise errors.ParseError(f"seed must be a 64-bit integer, got {seed!r}")
    return seed


def run_scenario(scenario: Scenario | str | Path, seed: int = 0, strict: bool = False) -> RunReport:
    """Replay every command through one world.

    Rejections are recorded and the run continues, except that a mismatch
    with ``expect``, a rejected ``must_succeed`` command or (with ``strict``)
    any rejection without an ``expect`` tag raises :class:`AssertionFailure`.
    """
    if not isinstance(scenario, Scenario):
        scenario = load_scenario(scenario)
    check_seed(seed)
    world = World(seed=seed, **scenario.config)
    rejected: list[dict[str, Any]] = []
    for cmd in scenario.commands:
        outcome = "ok"
        message = ""
        try:
            world.apply(cmd.op, cmd.args)
        except errors.EcosystemError as exc:
            outcome, message = exc.code, str(exc)
            rejected.append({"seq": cmd.seq, "op": cmd.op, "error": outcome, "message": message})
            log.debug("seq %d %s rejected: %s", cmd.seq, cmd.op, outcome)
        if cmd.expect is not None and cmd.expect != outcome:
            raise errors.AssertionFailure(f"seq {cmd.seq} {cmd.op}: expected {cmd.expect}, got {outcome} {message}")
        if outcome != "ok" and cmd.expect is None and (cmd.must_succeed or strict):
            raise errors.AssertionFailure(f"seq {cmd.seq} {cmd.op} must succeed: {outcome} {message}")
    return RunReport(
        final_digest=world.state_digest(),
        command_count=len(scenario.commands),
        rejected=rejected,
        seed=seed,
        scenario=scenario.name,
        completed=True,
        world=world,
    )


# ------------------------------------------------------------------ export
def _num(value: Fraction | int | None) -> str:
    if value is None:
        return ""
    if isinstance(value, Fraction):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    return str(value)


def _csv(header_lines: list[str], columns: list[str], rows: list) -> str:
    buf = io.StringIO()
    for line in header_lines:
        buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    writer.writerows(rows)
    return buf.getvalue()


def render_tension_report(report, hash_algorithm: str = HASH_ALGORITHM, state_digest: str = "") -> str:
    buf = io.StringIO()
    buf.write("# report: tension\n")
    buf.write(f"# interval: {report.interval}\n")
    buf.write(f"# structure: {report.structure.value}\n")
    buf.write(f"# hash_algorithm: {hash_algorithm}\n")
    if state_digest:
        buf.write(f"# state_digest: {state_digest}\n")
    buf.write("# distance = choice/4; means are arithmetic over voters present\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["stakeholder", "edge", "choice", "distance"])
    for j, edge, choice, d in report.rows:
        writer.writerow([j, edge.value, choice, _num(d)])
    buf.write("# edge means\n")
    writer.writerow(["edge", "mean", "voters"])
    for edge, mean in report.means.items():
        writer.writerow([edge.value, _num(mean), report.voters[edge]])
    buf.write(f"# classification: {report.classification.value}\n")
    return buf.getvalue()


def render_reports(world: World, run: RunReport | None = None) -> dict[str, str]:
    """All report files as ``{file name: text}``; ordering is stable."""
    files: dict[str, str] = {}
    head = [f"hash_algorithm: {world.hash_algorithm}", f"state_digest: {world.state_digest()}"]

    rows = [r for report in world.disbursements for r in report.rows()]
    files["disbursements.csv"] = _csv(["report: disbursements", *head], ["payment_id", "class", "account", "amount"], rows)

    tension = world.tension
    tally_rows = []
    for x in sorted(tension.proposals):
        for i in range(tension.interval + 1):
            counts = tension.tally_in_interval(x, i).counts
            tally_rows.extend([x, i, c, counts[c]] for c in range(NUM_CHOICES))
    files["tallies.csv"] = _csv(["report: interval tallies", *head], ["proposal", "interval", "choice", "count"], tally_rows)

    structures = sorted({p.structure for p in tension.proposals.values()}, key=lambda s: s.value)
    for structure in structures:
        for i in range(tension.interval):
            report = tension.tension_report(i, structure)
            files[f"tension_{structure.value.lower()}_{i:04d}.csv"] = render_tension_report(report, world.hash_algorithm, world.state_digest())

    gov_rows = []
    for pid, p in sorted(world.governance.proposals.items()):
        gov_rows.append(
            [pid, p.kind.value, p.proposer, p.status.value, _num(p.weight(Choice.YES)), _num(p.weight(Choice.NO)), _num(p.total_power)]
        )
    files["governance.csv"] = _csv(
        ["report: governance proposals", *head, f"treasury_balance: {world.revenue.treasury.balance}"],
        ["proposal_id", "kind", "proposer", "status", "yes_power", "no_power", "snapshot_power"],
        gov_rows,
    )

    listing_rows = [
        [l.listing_id, l.seller, l.asset_id, l.token_class.value, l.amount, l.unit_price, l.state.value, l.buyer or ""]
        for _, l in sorted(world.market.listings.items())
    ]
    files["listings.csv"] = _csv(
        ["report: listings", *head],
        ["listing_id", "seller", "asset_id", "class", "amount", "unit_price", "state", "buyer"],
        listing_rows,
    )
    search_rows = []
    for n, (q, hits) in enumerate(world.searches, 1):
        search_rows.extend([n, q, rank, a] for rank, a in enumerate(hits, 1))
        if not hits:
            search_rows.append([n, q, 0, ""])
    files["searches.csv"] = _csv(["report: searches", *head], ["search", "query", "rank", "asset_id"], search_rows)
    files["manifest.csv"] = _csv(
        ["report: datastore manifest", *head], ["asset_id", "component_ref", "version", "digest", "cert_id"], world.datastore.manifest()
    )
    files["state_digest.txt"] = f"hash_algorithm: {world.hash_algorithm}\ndigest: {world.state_digest()}\n"
    if run is not None:
        summary = run.to_dict()
        summary["report_files"] = sorted(files) + ["run.json"]
        files["run.json"] = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    return files


def export_reports(run: RunReport, directory: str | Path) -> dict[str, Path]:
    if not run.completed or run.world is None:
        raise errors.IoFailure("run has not completed; nothing to export")
    directory = Path(directory)
    files = render_reports(run.world, run)
    written: dict[str, Path] = {}
    try:
        directory.mkdir(parents=True, exist_ok=True)
        for name, text in sorted(files.items()):
            path = directory / name
            path.write_text(text, encoding="utf-8", newline="\n")
            written[name] = path
    except OSError as exc:
        raise errors.IoFailure(f"cannot write reports to {directory}: {exc}") from None
    run.report_files = {name: str(path) for name, path in written.items()}
    return written
