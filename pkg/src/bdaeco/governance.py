"""Ecosystem DAO: caretaker and strategic proposals with power-weighted votes.

Each voter's weight is frozen in a power snapshot taken when the proposal
opens, so later transfers cannot swing an open vote.  Acceptance needs a strict majority of the snapshot total;
ties and abstentions count against.  Nothing here touches ownership books.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any

from . import errors
from .ledger import Ledger
from .revenue import Revenue


class ProposalKind(str, Enum):
    CARETAKER = "Caretaker"
    STRATEGIC = "Strategic"


class ProposalStatus(str, Enum):
    OPEN = "Open"
    ACCEPTED = "Accepted"
    REJECTED = "Rejected"
    EXECUTED = "Executed"


class Choice(str, Enum):
    YES = "Yes"
    NO = "No"


_SPEND_KEYS = ("subsidies", "fee_rate_bp", "deactivate_fee")


@dataclass(frozen=True)
class Subsidy:
    recipient: str
    amount: int
    note: str = ""


@dataclass(frozen=True)
class ProposalPayload:
    description: str = ""
    subsidies: tuple[Subsidy, ...] = ()
    fee_rate_bp: int | None = None
    deactivate_fee: bool = False

    @property
    def spend(self) -> int:
        return sum(s.amount for s in self.subsidies)

    @classmethod
    def from_dict(cls, data: dict[str, Any] | None) -> "ProposalPayload":
        data = dict(data or {})
        unknown = set(data) - {"description", *_SPEND_KEYS}
        if unknown:
            raise errors.MalformedPayload(f"unknown payload keys {sorted(unknown)}")
        try:
            subsidies = tuple(
                Subsidy(str(s["recipient"]), int(s["amount"]), str(s.get("note", "")))
                for s in data.get("subsidies", ())
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise errors.MalformedPayload(f"bad subsidy entry: {exc}") from None
        fee = data.get("fee_rate_bp")
        if fee is not None and (not isinstance(fee, int) or not 0 <= fee <= 10_000):
            raise errors.MalformedPayload("fee_rate_bp must be an integer in [0, 10000]")
        return cls(str(data.get("description", "")), subsidies, fee, bool(data.get("deactivate_fee", False)))

    def to_dict(self) -> dict:
        return {
            "description": self.description,
            "subsidies": [[s.recipient, s.amount, s.note] for s in self.subsidies],
            "fee_rate_bp": self.fee_rate_bp,
            "deactivate_fee": self.deactivate_fee,
        }


@dataclass
class Proposal:
    proposal_id: str
    kind: ProposalKind
    proposer: str
    payload: ProposalPayload
    snapshot: dict[str, Fraction]
    status: ProposalStatus = ProposalStatus.OPEN
    ballots: dict[str, Choice] = field(default_factory=dict)

    @property
    def total_power(self) -> Fraction:
        return sum(self.snapshot.values(), Fraction(0))

    def weight(self, choice: Choice) -> Fraction:
        return sum((self.snapshot[v] for v, c in self.ballots.items() if c is choice), Fraction(0))

    def to_dict(self) -> dict:
        return {
            "proposal_id": self.proposal_id,
            "kind": self.kind.value,
            "proposer": self.proposer,
            "payload": self.payload.to_dict(),
            "snapshot": dict(self.snapshot),
            "status": self.status.value,
            "ballots": {v: c.value for v, c in self.ballots.items()},
        }


@dataclass
class Governance:
    ledger: Ledger
    revenue: Revenue
    proposals: dict[str, Proposal] = field(default_factory=dict)
    _next_proposal: int = 1

    def proposal(self, proposal_id: str) -> Proposal:
        try:
            return self.proposals[proposal_id]
        except KeyError:
            raise errors.UnknownProposal(proposal_id) from None

    def submit_proposal(
        self,
        proposer: str,
        kind: ProposalKind | str,
        payload: ProposalPayload | dict[str, Any] | None = None,
    ) -> str:
        kind = ProposalKind(kind)
        if not isinstance(payload, ProposalPayload):
            payload = ProposalPayload.from_dict(payload)
        self.ledger.account(proposer)
        snapshot = self.ledger.governance_power()
        if snapshot.get(proposer, 0) <= 0:
            raise errors.NotAGovernor(f"{proposer} holds no governance power")
        if kind is ProposalKind.CARETAKER and (
            payload.spend or payload.subsidies or payload.fee_rate_bp is not None or payload.deactivate_fee
        ):
            raise errors.MalformedPayload("caretaker proposals cannot touch the treasury")
        if any(s.amount <= 0 for s in payload.subsidies):
            raise errors.MalformedPayload("subsidy amounts must be positive")
        for s in payload.subsidies:
            self.ledger.account(s.recipient)
        proposal_id = f"prop-{self._next_proposal:06d}"
        self._next_proposal += 1
        self.proposals[proposal_id] = Proposal(proposal_id, kind, proposer, payload, snapshot)
        return proposal_id

    def cast_governance_vote(self, proposal_id: str, voter: str, choice: Choice | str) -> Fraction:
        choice = Choice(choice)
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.OPEN:
            raise errors.ProposalClosed(proposal_id)
        weight = proposal.snapshot.get(voter, Fraction(0))
        if weight <= 0:
            raise errors.NotAGovernor(f"{voter} had no power when {proposal_id} opened")
        proposal.ballots[voter] = choice
        return weight

    def close_and_tally(self, proposal_id: str) -> ProposalStatus:
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.OPEN:
            raise errors.ProposalClosed(proposal_id)
        accepted = 2 * proposal.weight(Choice.YES) > proposal.total_power
        proposal.status = ProposalStatus.ACCEPTED if accepted else ProposalStatus.REJECTED
        return proposal.status

    def execute_proposal(self, proposal_id: str) -> dict[str, Any]:
        proposal = self.proposal(proposal_id)
        if proposal.status is not ProposalStatus.ACCEPTED:
            raise errors.NotAccepted(f"{proposal_id} is {proposal.status.value}")
        actions: dict[str, Any] = {"proposal_id": proposal_id, "kind": proposal.kind.value}
        if proposal.kind is ProposalKind.STRATEGIC:
            p = proposal.payload
            grants = [(s.recipient, s.amount) for s in p.subsidies]
            # raises before any mutation when the treasury is short
            self.revenue.spend_treasury(grants)
            treasury = self.revenue.treasury
            if p.deactivate_fee:
                treasury.active = False
            else:
                if p.fee_rate_bp is not None:
                    treasury.fee_rate_bp = p.fee_rate_bp
                treasury.active = True
            actions.update(
                subsidies=grants,
                fee_active=treasury.active,
                fee_rate_bp=treasury.fee_rate_bp,
                treasury_balance=treasury.balance,
            )
        proposal.status = ProposalStatus.EXECUTED
        return actions

    def execute_strategic(self, proposal_id: str) -> dict[str, Any]:
        proposal = self.proposal(proposal_id)
        if proposal.kind is not ProposalKind.STRATEGIC:
            raise errors.MalformedPayload(f"{proposal_id} is not a strategic proposal")
        return self.execute_proposal(proposal_id)

    def state(self) -> dict:
        return {k: v.to_dict() for k, v in self.proposals.items()}
