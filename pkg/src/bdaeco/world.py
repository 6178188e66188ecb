"""The simulated ecosystem: every module behind one serialized command log.

:meth:`World.apply` is the single writer.  It dispatches a named operation,
records the outcome in :attr:`World.log` (digests only, never payloads) and
advances the logical clock on success.  Public methods can also be called
directly; they enforce the same checks and are what ``apply`` dispatches to.
"""

from __future__ import annotations

import copy
import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from . import errors
from .canonical import HASH_ALGORITHM, digest
from .datastore import AccessLicence, Datastore, component_message, payload_digest
from .governance import Governance
from .keys import Attestation, KeyRing
from .ledger import Ledger, Role, TokenClass, TokenisationContract, certification_message
from .market import ListingState, Market, Settlement
from .revenue import DEFAULT_FEE_RATE_BP, DisbursementReport, Revenue
from .tension import IntervalProof, IntervalScheduler, Structure, Tally, TensionMeter, TensionReport, vote_message

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LogEntry:
    seq: int
    op: str
    args_digest: str
    ok: bool
    error: str | None = None
    message: str = ""


class World:
    def __init__(
        self,
        seed: int = 0,
        fee_rate_bp: int = DEFAULT_FEE_RATE_BP,
        interval_min: int = 8,
        interval_max: int = 64,
        auto_intervals: bool = False,
    ):
        self.seed = seed
        self.keyring = KeyRing(seed)
        self.ledger = Ledger(self.keyring)
        self.revenue = Revenue(self.ledger)
        self.revenue.treasury.fee_rate_bp = fee_rate_bp
        self.datastore = Datastore(self.ledger, self.revenue)
        self.market = Market(self.ledger, self.revenue)
        self.governance = Governance(self.ledger, self.revenue)
        self.tension = TensionMeter(self.keyring, IntervalScheduler(seed, interval_min, interval_max))
        self.auto_intervals = auto_intervals
        self.clock = 0
        self.log: list[LogEntry] = []
        self.disbursements: list[DisbursementReport] = []
        self.searches: list[tuple[str, list[str]]] = []
        self.tension_reports: list[TensionReport] = []

    # ================================================================ ledger
    def register_account(self, role: Role | str, account_id: str | None = None) -> str:
        return self.ledger.register_account(role, account_id)

    def certify_contract(self, certifier: str, data_digest: str, timestamp: int) -> Attestation:
        """Certifier signs timestamped building data (simulation holds all keys)."""
        return self.keyring.sign(certifier, certification_message(data_digest, timestamp))

    def make_contract(
        self,
        ownership_split,
        economic_supply: int,
        certifier: str | None = None,
        *,
        ownership_supply: int | None = None,
        merit_weight: int | None = None,
        datastore_ref: str = "",
        data_digest: str = "",
        timestamp: int = 0,
        certifier_signature: Attestation | dict | None = None,
    ) -> TokenisationContract:
        if isinstance(ownership_split, dict):
            split = tuple((str(k), v) for k, v in ownership_split.items())
        else:
            split = tuple((str(k), v) for k, v in ownership_split)
        if ownership_supply is None:
            ownership_supply = sum(v for _, v in split)
        if certifier_signature is None:
            if certifier is None:
                raise errors.BadSignature("contract needs a certifier or an explicit signature")
            certifier_signature = self.certify_contract(certifier, data_digest, timestamp)
        elif isinstance(certifier_signature, dict):
            certifier_signature = Attestation.from_dict(certifier_signature)
        return TokenisationContract(
            ownership_split=split,
            ownership_supply=ownership_supply,
            economic_supply=economic_supply,
            datastore_ref=datastore_ref,
            data_digest=data_digest,
            timestamp=timestamp,
            certifier_signature=certifier_signature,
            merit_weight=merit_weight,
        )

    def onboard_asset(self, contract: TokenisationContract, tokeniser: str, asset_id: str | None = None) -> str:
        return self.ledger.onboard_asset(contract, tokeniser, asset_id)

    def transfer_economic(self, asset_id: str, sender: str, recipient: str, amount: int) -> None:
        self.ledger.transfer_economic(asset_id, sender, recipient, amount)

    def transfer_ownership(self, asset_id: str, sender: str, recipient: str, amount: int) -> dict[str, Fraction]:
        self.ledger.transfer_ownership(asset_id, sender, recipient, amount)
        return self.ledger.powers(asset_id)

    def retire_asset(self, asset_id: str, approvers: list[str]) -> None:
        self.ledger.retire_asset(asset_id, approvers)
        self.datastore.flag_for_deletion(asset_id)
        self.market.drop(asset_id)
        for listing in sorted(self.market.listings.values(), key=lambda l: l.listing_id):
            if listing.asset_id == asset_id and listing.state is ListingState.OPEN:
                self.market.cancel_listing(listing.listing_id, listing.seller)

    # =============================================================== revenue
    def deposit(self, account_id: str, amount: int) -> int:
        return self.revenue.deposit(account_id, amount)

    def set_price(self, asset_id: str, component_ref: str, price: int, approvers: list[str]) -> None:
        self.revenue.set_price(asset_id, component_ref, price, approvers)

    def pay_asset(self, consumer: str, asset_id: str, amount: int, component_ref: str) -> str:
        return self.revenue.pay_asset(consumer, asset_id, amount, component_ref)

    def confirm_payment(self, asset_id: str, consumer: str, component_ref: str) -> bool:
        return self.revenue.confirm_payment(asset_id, consumer, component_ref)

    def distribute(self, payment_id: str) -> DisbursementReport:
        report = self.revenue.distribute(payment_id)
        self.disbursements.append(report)
        return report

    # ============================================================= datastore
    def certify_component(self, certifier: str, asset_id: str, component_ref: str, payload: dict) -> Attestation:
        return self.keyring.sign(certifier, component_message(asset_id, component_ref, payload_digest(payload)))

    def store_component(
        self,
        asset_id: str,
        component_ref: str,
        payload: dict,
        personal_fields: dict[str, str] | None = None,
        cert: Attestation | dict | None = None,
        tags: list[str] | tuple[str, ...] = (),
        certifier: str | None = None,
    ) -> int:
        if cert is None:
            if certifier is None:
                raise errors.BadCertification("component needs a certifier or an explicit cert")
            cert = self.certify_component(certifier, asset_id, component_ref, payload)
        elif isinstance(cert, dict):
            cert = Attestation.from_dict(cert)
        version = self.datastore.store_component(asset_id, component_ref, payload, personal_fields, cert, tuple(tags))
        self.market.index_component(asset_id, component_ref, tags)
        return version

    def request_information(self, consumer: str, asset_id: str, component_ref: str) -> tuple[dict, AccessLicence]:
        return self.datastore.request_information(consumer, asset_id, component_ref, issued_at=self.clock)

    def forget(self, subject_key: str) -> int:
        return self.datastore.forget(subject_key)

    def audit_digest(self, asset_id: str):
        return self.datastore.audit_digest(asset_id)

    # ================================================================ market
    def search(self, query) -> list[str]:
        hits = self.market.search(query)
        self.searches.append((query if isinstance(query, str) else " ".join(query), hits))
        return hits

    def list_tokens(self, seller: str, asset_id: str, token_class: TokenClass | str, amount: int, unit_price: int) -> str:
        return self.market.list_tokens(seller, asset_id, token_class, amount, unit_price)

    def cancel_listing(self, listing_id: str, seller: str) -> None:
        self.market.cancel_listing(listing_id, seller)

    def take_listing(self, buyer: str, listing_id: str, pay_amount: int) -> Settlement:
        return self.market.take_listing(buyer, listing_id, pay_amount)

    # ============================================================ governance
    def submit_proposal(self, proposer: str, kind: str, payload: dict | None = None) -> str:
        return self.governance.submit_proposal(proposer, kind, payload)

    def cast_governance_vote(self, proposal_id: str, voter: str, choice: str) -> Fraction:
        return self.governance.cast_governance_vote(proposal_id, voter, choice)

    def close_and_tally(self, proposal_id: str):
        return self.governance.close_and_tally(proposal_id)

    def execute_proposal(self, proposal_id: str) -> dict:
        return self.governance.execute_proposal(proposal_id)

    def execute_strategic(self, proposal_id: str) -> dict:
        return self.governance.execute_strategic(proposal_id)

    # ========================================================= tension meter
    def register_stakeholder(self, stakeholder: str, tier: str) -> None:
        self.tension.register_stakeholder(stakeholder, tier)

    def add_stability_proposal(self, x: int, edge: str, tier_scope, structure: str = "Hierarchical", question: str = ""):
        return self.tension.add_proposal(x, edge, tier_scope, structure, question)

    def sign_vote(self, stakeholder: str, x: int, interval: int, choice: int) -> Attestation:
        return self.keyring.sign(stakeholder, vote_message(stakeholder, x, interval, choice))

    def vote_in_interval(
        self,
        x: int,
        interval: int,
        choice: int,
        proof: Attestation | dict | None = None,
        stakeholder: str | None = None,
    ) -> None:
        if proof is None:
            if stakeholder is None:
                raise errors.BadProof("vote needs a stakeholder or an explicit proof")
            if isinstance(choice, int) and not isinstance(choice, bool):
                proof = self.sign_vote(stakeholder, x, interval, choice)
            else:
                proof = Attestation(stakeholder, "")  # tension rejects the choice first
        elif isinstance(proof, dict):
            proof = Attestation.from_dict(proof)
        self.tension.vote_in_interval(x, interval, choice, proof)

    def tally_in_interval(self, x: int, interval: int) -> Tally:
        return self.tension.tally_in_interval(x, interval)

    def weighted_tally_in_interval(self, x: int, interval: int, weights: dict | None = None) -> Tally:
        if weights is None:
            weights = self.ledger.governance_power()
        return self.tension.weighted_tally_in_interval(x, interval, weights)

    def update_interval(self, nxtint: int, proof: IntervalProof | dict) -> int:
        if isinstance(proof, dict):
            proof = IntervalProof(int(proof["nxtint"]), int(proof["next_end"]), str(proof["salt"]))
        return self.tension.update_interval(nxtint, proof, self.clock)

    def advance_interval(self) -> int:
        return self.tension.advance(self.clock)

    def tension_report(self, interval: int, structure: str = "Hierarchical") -> TensionReport:
        report = self.tension.tension_report(interval, Structure(structure))
        self.tension_reports.append(report)
        return report

    # ======================================================= command log
    OPERATIONS = (
        "register_account", "onboard_asset", "transfer_economic", "transfer_ownership", "retire_asset",
        "deposit", "set_price", "pay_asset", "confirm_payment", "distribute",
        "store_component", "request_information", "forget", "audit_digest",
        "search", "list_tokens", "cancel_listing", "take_listing",
        "submit_proposal", "cast_governance_vote", "close_and_tally", "execute_proposal", "execute_strategic",
        "register_stakeholder", "add_stability_proposal", "vote_in_interval", "tally_in_interval",
        "weighted_tally_in_interval", "update_interval", "advance_interval", "tension_report",
    )

    def _call(self, op: str, args: dict[str, Any]) -> Any:
        if op not in self.OPERATIONS:
            raise errors.UnknownOperation(op)
        if op == "onboard_asset":
            args = dict(args)
            tokeniser = args.pop("tokeniser")
            asset_id = args.pop("asset_id", None)
            contract = args.pop("contract", None)
            if contract is None:
                ownership_split = args.pop("ownership_split")
                economic_supply = args.pop("economic_supply")
                certifier = args.pop("certifier", None)
                contract = self.make_contract(ownership_split, economic_supply, certifier, **args)
            return self.onboard_asset(contract, tokeniser, asset_id)
        return getattr(self, op)(**args)

    def apply(self, op: str, args: dict[str, Any] | None = None) -> Any:
        """Run one command through the log; rejections raise after logging."""
        args = args or {}
        seq = len(self.log) + 1
        args_digest = digest(_loggable(args))
        try:
            result = self._call(op, args)
        except errors.EcosystemError as exc:
            self.log.append(LogEntry(seq, op, args_digest, False, exc.code, str(exc)))
            raise
        except (TypeError, ValueError, KeyError) as exc:
            err = errors.ParseError(f"{op}: bad arguments ({exc})")
            self.log.append(LogEntry(seq, op, args_digest, False, err.code, str(err)))
            raise err from None
        self.log.append(LogEntry(seq, op, args_digest, True))
        self.clock += 1
        if self.auto_intervals and self.tension.tick(self.clock):
            log.debug("interval advanced to %d at t=%d", self.tension.interval, self.clock)
        return result

    # ============================================================= digests
    def state(self) -> dict:
        return {
            "clock": self.clock,
            "ledger": self.ledger.state(),
            "revenue": self.revenue.state(),
            "datastore": self.datastore.state(),
            "market": self.market.state(),
            "governance": self.governance.state(),
            "tension": self.tension.state(),
        }

    def state_digest(self) -> str:
        return digest(self.state())

    def ownership_digest(self) -> str:
        return self.ledger.ownership_book_digest()

    def snapshot(self) -> dict:
        """Detached copy of the canonical state for concurrent readers."""
        return copy.deepcopy(self.state())

    hash_algorithm = HASH_ALGORITHM


def _loggable(args: dict[str, Any]) -> dict:
    """Arguments as they may appear in the log: payloads replaced by digests."""
    out = {}
    for k, v in args.items():
        if k == "payload" and isinstance(v, dict):
            out[k] = {"digest": payload_digest(v)}
        elif isinstance(v, (Attestation, IntervalProof, TokenisationContract)):
            out[k] = repr(v)
        else:
            out[k] = _plain(v)
    return out


def _plain(v: Any) -> Any:
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if v is None or isinstance(v, (bool, int, str, Fraction)):
        return v
    return repr(v)
