"""Interval voting for DAO stability and tension-quadrilateral reports.

Stakeholders answer three standing questions on a 0..4 scale, one per edge
of the quadrilateral (individual A, own-tier majority B, higher tier C,
exit D):

* ``AB`` satisfaction with one's own tier (0 agrees, 4 disagrees)
* ``AC`` satisfaction with the higher tier (hierarchical DAOs only)
* ``AD`` proximity to exit (0 closest to exit, 4 farthest)

Votes live in ``vote[x][i][j]`` and may be overwritten only while interval
``i`` is current.  The interval advances when the scheduler reveals the
preimage of the boundary it committed to, so the end of an interval cannot
be read off public state beforehand.
"""

from __future__ import annotations

import random
import statistics
from collections.abc import Mapping
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from . import errors
from .canonical import digest
from .keys import Attestation, KeyRing

NUM_CHOICES = 5
MAX_CHOICE = NUM_CHOICES - 1


class Edge(str, Enum):
    AB = "AB"
    AC = "AC"
    AD = "AD"
    BD = "BD"  # derived group edge of the flat triangle


class Structure(str, Enum):
    HIERARCHICAL = "Hierarchical"
    FLAT = "Flat"


class Classification(str, Enum):
    BEST = "BestCase"
    WORST = "WorstCase"
    INTERMEDIATE = "Intermediate"


VOTABLE_EDGES = (Edge.AB, Edge.AC, Edge.AD)


def distance(choice: int) -> Fraction:
    """Normalised edge length of a 0..4 answer, in [0, 1]."""
    if not 0 <= choice <= MAX_CHOICE:
        raise errors.BadChoice(f"choice {choice} outside 0..{MAX_CHOICE}")
    return Fraction(choice, MAX_CHOICE)


def vote_message(stakeholder: str, x: int, interval: int, choice: int) -> tuple:
    return ("interval-vote", stakeholder, x, interval, choice)


@dataclass(frozen=True)
class StabilityProposal:
    x: int
    edge: Edge
    tier_scope: frozenset[str]
    structure: Structure
    question: str = ""

    def to_dict(self) -> dict:
        return {
            "x": self.x,
            "edge": self.edge.value,
            "tier_scope": set(self.tier_scope),
            "structure": self.structure.value,
            "question": self.question,
        }


@dataclass(frozen=True)
class Tally:
    x: int
    interval: int
    counts: tuple

    def __getitem__(self, choice: int):
        return self.counts[choice]


@dataclass(frozen=True)
class IntervalProof:
    """Reveal that opens the commitment for the boundary into ``nxtint``."""

    nxtint: int
    next_end: int
    salt: str


def boundary_commitment(nxtint: int, next_end: int, salt: str) -> str:
    return digest(("interval-boundary", nxtint, next_end, salt))


class IntervalScheduler:
    """Commit-reveal holder of the secret interval boundaries.

    ``next_end`` is a logical time drawn from a seeded generator when an
    interval opens.  Only the commitment is public until :meth:`reveal`.
    """

    def __init__(self, seed: int = 0, min_length: int = 8, max_length: int = 64):
        if not 1 <= min_length <= max_length:
            raise ValueError("need 1 <= min_length <= max_length")
        self._rng = random.Random(f"interval-scheduler:{seed}")
        self.min_length = min_length
        self.max_length = max_length
        self.commitment: str = ""
        self._nxtint = 0
        self._next_end = 0
        self._salt = ""

    def open(self, nxtint: int, now: int) -> str:
        self._nxtint = nxtint
        self._next_end = now + self._rng.randint(self.min_length, self.max_length)
        self._salt = f"{self._rng.getrandbits(128):032x}"
        self.commitment = boundary_commitment(nxtint, self._next_end, self._salt)
        return self.commitment

    def due(self, now: int) -> bool:
        return now >= self._next_end

    def reveal(self) -> IntervalProof:
        return IntervalProof(self._nxtint, self._next_end, self._salt)

    def verify(self, nxtint: int, proof: IntervalProof) -> bool:
        return (
            proof.nxtint == nxtint
            and boundary_commitment(proof.nxtint, proof.next_end, proof.salt) == self.commitment
        )


@dataclass(frozen=True)
class TensionReport:
    interval: int
    structure: Structure
    rows: tuple[tuple[str, Edge, int, Fraction], ...]
    means: dict[Edge, Fraction | None]
    voters: dict[Edge, int]
    classification: Classification

    @property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(self.means)

    def distances(self, stakeholder: str) -> dict[Edge, Fraction]:
        return {edge: d for j, edge, _, d in self.rows if j == stakeholder}


def classify(means: Mapping[Edge, Fraction | None], structure: Structure) -> Classification:
    ab, ad = means.get(Edge.AB), means.get(Edge.AD)
    if ad is not None and ad == 0:
        return Classification.WORST
    needed = [ab, ad] + ([means.get(Edge.AC)] if structure is Structure.HIERARCHICAL else [])
    if any(m is None for m in needed):
        return Classification.INTERMEDIATE
    ac_ok = structure is Structure.FLAT or means[Edge.AC] == 0
    if ab == 0 and ac_ok and ad == 1:
        return Classification.BEST
    return Classification.INTERMEDIATE


@dataclass
class TensionMeter:
    keyring: KeyRing
    scheduler: IntervalScheduler = field(default_factory=IntervalScheduler)
    stakeholders: dict[str, str] = field(default_factory=dict)  # id -> tier
    proposals: dict[int, StabilityProposal] = field(default_factory=dict)
    # (x, interval) -> stakeholder -> choice
    votes: dict[tuple[int, int], dict[str, int]] = field(default_factory=dict)
    interval: int = 0

    def __post_init__(self) -> None:
        if not self.scheduler.commitment:
            self.scheduler.open(self.interval + 1, 0)

    # ------------------------------------------------------------ registration
    def register_stakeholder(self, stakeholder: str, tier: str) -> None:
        self.stakeholders[stakeholder] = tier

    def add_proposal(
        self,
        x: int,
        edge: Edge | str,
        tier_scope,
        structure: Structure | str = Structure.HIERARCHICAL,
        question: str = "",
    ) -> StabilityProposal:
        edge, structure = Edge(edge), Structure(structure)
        if x in self.proposals:
            raise errors.MalformedStabilityProposal(f"proposal {x} already exists")
        if edge not in VOTABLE_EDGES:
            raise errors.MalformedStabilityProposal(f"edge {edge.value} is not voted on directly")
        if structure is Structure.FLAT and edge is Edge.AC:
            raise errors.MalformedStabilityProposal("a flat DAO has no higher tier to rate")
        if any(p.structure is structure and p.edge is edge for p in self.proposals.values()):
            raise errors.MalformedStabilityProposal(f"{structure.value} already has an {edge.value} proposal")
        if isinstance(tier_scope, str):
            tier_scope = [tier_scope]
        proposal = StabilityProposal(x, edge, frozenset(tier_scope), structure, question)
        self.proposals[x] = proposal
        return proposal

    def proposal(self, x: int) -> StabilityProposal:
        try:
            return self.proposals[x]
        except KeyError:
            raise errors.UnknownStabilityProposal(str(x)) from None

    # ----------------------------------------------------------------- voting
    def is_interval_current(self, interval: int) -> bool:
        return interval == self.interval

    def is_interval_existing(self, interval: int) -> bool:
        return isinstance(interval, int) and 0 <= interval <= self.interval

    def verify_voter(self, proof: Attestation, x: int, interval: int, choice: int) -> bool:
        return proof.signer in self.stakeholders and self.keyring.verify(
            proof, vote_message(proof.signer, x, interval, choice)
        )

    def vote_in_interval(self, x: int, interval: int, choice: int, proof: Attestation) -> None:
        """Store ``choice`` as ``vote[x][interval][signer]``.

        Every check happens before the write, so a rejected vote leaves the
        store untouched.
        """
        proposal = self.proposal(x)
        if not self.is_interval_current(interval):
            raise errors.StaleInterval(f"interval {interval} is not current ({self.interval})")
        if not isinstance(choice, int) or isinstance(choice, bool) or not 0 <= choice <= MAX_CHOICE:
            raise errors.BadChoice(f"choice {choice!r} outside 0..{MAX_CHOICE}")
        if not self.verify_voter(proof, x, interval, choice):
            raise errors.BadProof(f"eligibility proof from {proof.signer} does not verify")
        if self.stakeholders[proof.signer] not in proposal.tier_scope:
            raise errors.OutOfScope(f"{proof.signer} is not in tiers {sorted(proposal.tier_scope)}")
        self.votes.setdefault((x, interval), {})[proof.signer] = choice

    def _existing(self, interval: int) -> None:
        if not self.is_interval_existing(interval):
            raise errors.UnknownInterval(f"interval {interval} does not exist")

    def tally_in_interval(self, x: int, interval: int) -> Tally:
        self.proposal(x)
        self._existing(interval)
        counts = [0] * NUM_CHOICES
        for choice in self.votes.get((x, interval), {}).values():
            counts[choice] += 1
        return Tally(x, interval, tuple(counts))

    def weighted_tally_in_interval(self, x: int, interval: int, weights: Mapping[str, int | Fraction]) -> Tally:
        """Sum of voter weights per choice; voters missing from ``weights`` weigh 0."""
        self.proposal(x)
        self._existing(interval)
        counts = [Fraction(0)] * NUM_CHOICES
        for voter, choice in self.votes.get((x, interval), {}).items():
            counts[choice] += Fraction(weights.get(voter, 0))
        return Tally(x, interval, tuple(counts))

    def update_interval(self, nxtint: int, proof: IntervalProof, now: int = 0) -> int:
        if nxtint != self.interval + 1 or not self.scheduler.verify(nxtint, proof):
            raise errors.BadTrigger(f"trigger for interval {nxtint} rejected")
        self.interval += 1
        self.scheduler.open(self.interval + 1, now)
        return self.interval

    def advance(self, now: int = 0) -> int:
        """Have the scheduler reveal its secret and apply it."""
        return self.update_interval(self.interval + 1, self.scheduler.reveal(), now)

    def tick(self, now: int) -> bool:
        if self.scheduler.due(now):
            self.advance(now)
            return True
        return False

    # ---------------------------------------------------------------- reports
    def tension_report(self, interval: int, structure: Structure | str) -> TensionReport:
        """Per-stakeholder edge distances and edge means for a closed interval.

        Means are arithmetic over the voters present; absentees are not
        imputed.  In a flat DAO the triangle's third edge ``BD`` is the median
        exit distance, i.e. where the group majority stands relative to exit.
        """
        structure = Structure(structure)
        self._existing(interval)
        if interval >= self.interval:
            raise errors.IntervalStillOpen(f"interval {interval} is still open")
        by_edge = {p.edge: p.x for p in self.proposals.values() if p.structure is structure}
        edges = (Edge.AB, Edge.AC, Edge.AD) if structure is Structure.HIERARCHICAL else (Edge.AB, Edge.AD)
        rows = []
        means: dict[Edge, Fraction | None] = {}
        voters: dict[Edge, int] = {}
        for edge in edges:
            ballots = self.votes.get((by_edge[edge], interval), {}) if edge in by_edge else {}
            ds = []
            for j in sorted(ballots):
                d = distance(ballots[j])
                rows.append((j, edge, ballots[j], d))
                ds.append(d)
            means[edge] = sum(ds, Fraction(0)) / len(ds) if ds else None
            voters[edge] = len(ds)
        if structure is Structure.FLAT:
            exit_ds = [d for _, e, _, d in rows if e is Edge.AD]
            means[Edge.BD] = Fraction(statistics.median(exit_ds)) if exit_ds else None
            voters[Edge.BD] = len(exit_ds)
        rows.sort(key=lambda r: (r[0], r[1].value))
        return TensionReport(interval, structure, tuple(rows), means, voters, classify(means, structure))

    def state(self) -> dict:
        return {
            "interval": self.interval,
            "commitment": self.scheduler.commitment,
            "stakeholders": dict(self.stakeholders),
            "proposals": {x: p.to_dict() for x, p in self.proposals.items()},
            "votes": {f"{x}/{i}": dict(b) for (x, i), b in self.votes.items()},
        }
