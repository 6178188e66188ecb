"""Accounts, asset registry and fungible token balances.

Governance power is never stored.  It is derived from ownership holdings as
``merit_weight * held / ownership_supply`` with exact rationals, so moving
ownership tokens moves the matching share of power and nothing else can.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction

from . import errors
from .apportion import largest_remainder
from .canonical import digest
from .keys import Attestation, KeyRing


class Role(str, Enum):
    BUILDING_OWNER = "BuildingOwner"
    ASSET_COMPANY = "AssetCompany"
    CONTRACTOR = "Contractor"
    CERTIFIER = "Certifier"
    TOKENISER = "Tokeniser"
    INVESTOR = "Investor"
    CONSUMER = "Consumer"


class TokenClass(str, Enum):
    OWNERSHIP = "Ownership"
    ECONOMIC = "Economic"


class AssetState(str, Enum):
    ACTIVE = "Active"
    RETIRED = "Retired"


#: roles allowed to hold ownership tokens (and hence governance power)
OWNERSHIP_ROLES = frozenset({Role.BUILDING_OWNER, Role.ASSET_COMPANY})


@dataclass(frozen=True)
class Account:
    id: str
    role: Role


@dataclass
class AssetRecord:
    asset_id: str
    datastore_ref: str
    ownership_supply: int
    economic_supply: int
    merit_weight: int
    contract_hash: str
    state: AssetState = AssetState.ACTIVE

    @property
    def active(self) -> bool:
        return self.state is AssetState.ACTIVE

    def to_dict(self) -> dict:
        return {
            "asset_id": self.asset_id,
            "datastore_ref": self.datastore_ref,
            "ownership_supply": self.ownership_supply,
            "economic_supply": self.economic_supply,
            "merit_weight": self.merit_weight,
            "contract_hash": self.contract_hash,
            "state": self.state.value,
        }


def certification_message(data_digest: str, timestamp: int) -> tuple:
    return ("tokenisation-certificate", data_digest, timestamp)


@dataclass(frozen=True)
class TokenisationContract:
    """Terms agreed between the owners and the tokeniser.

    ``merit_weight`` defaults to ``ownership_supply`` when omitted.
    """

    ownership_split: tuple[tuple[str, int], ...]
    ownership_supply: int
    economic_supply: int
    datastore_ref: str
    data_digest: str
    timestamp: int
    certifier_signature: Attestation
    merit_weight: int | None = None

    @property
    def effective_merit(self) -> int:
        return self.ownership_supply if self.merit_weight is None else self.merit_weight

    def contract_hash(self) -> str:
        return digest(
            {
                "ownership_split": [list(e) for e in self.ownership_split],
                "ownership_supply": self.ownership_supply,
                "economic_supply": self.economic_supply,
                "datastore_ref": self.datastore_ref,
                "data_digest": self.data_digest,
                "timestamp": self.timestamp,
                "merit_weight": self.effective_merit,
                "certifier_signature": self.certifier_signature.to_dict(),
            }
        )


def _check_amount(amount) -> int:
    if not isinstance(amount, int) or isinstance(amount, bool) or amount < 0:
        raise errors.InvalidAmount(f"amount must be a non-negative integer, got {amount!r}")
    return amount


@dataclass
class Ledger:
    keyring: KeyRing = field(default_factory=KeyRing)
    accounts: dict[str, Account] = field(default_factory=dict)
    assets: dict[str, AssetRecord] = field(default_factory=dict)
    # (asset_id, class) -> account -> free balance
    balances: dict[tuple[str, TokenClass], dict[str, int]] = field(default_factory=dict)
    # (asset_id, class) -> seller -> amount held in exchange escrow
    escrow: dict[tuple[str, TokenClass], dict[str, int]] = field(default_factory=dict)
    contract_hashes: set[str] = field(default_factory=set)
    _next_account: int = 1
    _next_asset: int = 1

    # ------------------------------------------------------------------ accounts
    def register_account(self, role: Role | str, account_id: str | None = None) -> str:
        role = Role(role)
        if account_id is None:
            while f"acct-{self._next_account:06d}" in self.accounts:
                self._next_account += 1
            account_id = f"acct-{self._next_account:06d}"
            self._next_account += 1
        elif account_id in self.accounts:
            raise errors.DuplicateAccount(account_id)
        self.accounts[account_id] = Account(account_id, role)
        return account_id

    def account(self, account_id: str) -> Account:
        try:
            return self.accounts[account_id]
        except KeyError:
            raise errors.UnknownAccount(account_id) from None

    def role(self, account_id: str) -> Role:
        return self.account(account_id).role

    # -------------------------------------------------------------------- assets
    def asset(self, asset_id: str) -> AssetRecord:
        try:
            return self.assets[asset_id]
        except KeyError:
            raise errors.UnknownAsset(asset_id) from None

    def active_asset(self, asset_id: str) -> AssetRecord:
        record = self.asset(asset_id)
        if not record.active:
            raise errors.AssetRetired(asset_id)
        return record

    def verify_certificate(self, attestation: Attestation, message) -> bool:
        signer = self.accounts.get(attestation.signer)
        return (
            signer is not None
            and signer.role is Role.CERTIFIER
            and self.keyring.verify(attestation, message)
        )

    def onboard_asset(
        self,
        contract: TokenisationContract,
        tokeniser: str,
        asset_id: str | None = None,
    ) -> str:
        if self.role(tokeniser) is not Role.TOKENISER:
            raise errors.WrongRole(f"{tokeniser} is not a Tokeniser")
        message = certification_message(contract.data_digest, contract.timestamp)
        if not self.verify_certificate(contract.certifier_signature, message):
            raise errors.BadSignature("certifier attestation does not verify")
        if contract.ownership_supply <= 0 or contract.economic_supply <= 0:
            raise errors.MalformedContract("token supplies must be positive")
        if contract.effective_merit < 0:
            raise errors.MalformedContract("merit weight must be non-negative")
        split: dict[str, int] = {}
        for owner, amount in contract.ownership_split:
            _check_amount(amount)
            split[owner] = split.get(owner, 0) + amount
        if sum(split.values()) != contract.ownership_supply:
            raise errors.SplitMismatch(
                f"split sums to {sum(split.values())}, supply is {contract.ownership_supply}"
            )
        for owner in split:
            if self.role(owner) not in OWNERSHIP_ROLES:
                raise errors.IneligibleRecipient(f"{owner} cannot hold ownership tokens")
        chash = contract.contract_hash()
        if chash in self.contract_hashes:
            raise errors.DuplicateAsset(f"contract {chash[:12]} already onboarded")
        if asset_id is None:
            while f"asset-{self._next_asset:06d}" in self.assets:
                self._next_asset += 1
            asset_id = f"asset-{self._next_asset:06d}"
            self._next_asset += 1
        elif asset_id in self.assets:
            raise errors.DuplicateAsset(asset_id)

        self.assets[asset_id] = AssetRecord(
            asset_id=asset_id,
            datastore_ref=contract.datastore_ref,
            ownership_supply=contract.ownership_supply,
            economic_supply=contract.economic_supply,
            merit_weight=contract.effective_merit,
            contract_hash=chash,
        )
        self.contract_hashes.add(chash)
        self.balances[(asset_id, TokenClass.OWNERSHIP)] = {o: a for o, a in split.items() if a}
        economic = largest_remainder(contract.economic_supply, split)
        self.balances[(asset_id, TokenClass.ECONOMIC)] = {o: a for o, a in economic.items() if a}
        self.escrow[(asset_id, TokenClass.OWNERSHIP)] = {}
        self.escrow[(asset_id, TokenClass.ECONOMIC)] = {}
        return asset_id

    # ------------------------------------------------------------------ balances
    def balance(self, asset_id: str, token_class: TokenClass | str, account_id: str) -> int:
        """Free (spendable) balance, excluding tokens escrowed on the exchange."""
        return self.balances.get((asset_id, TokenClass(token_class)), {}).get(account_id, 0)

    def escrowed(self, asset_id: str, token_class: TokenClass | str, account_id: str) -> int:
        return self.escrow.get((asset_id, TokenClass(token_class)), {}).get(account_id, 0)

    def holdings(self, asset_id: str, token_class: TokenClass | str) -> dict[str, int]:
        """Beneficial holdings: free balance plus own escrowed listings."""
        token_class = TokenClass(token_class)
        out = dict(self.balances.get((asset_id, token_class), {}))
        for acct, amount in self.escrow.get((asset_id, token_class), {}).items():
            out[acct] = out.get(acct, 0) + amount
        return {a: n for a, n in out.items() if n}

    def supply(self, asset_id: str, token_class: TokenClass | str) -> int:
        record = self.asset(asset_id)
        if TokenClass(token_class) is TokenClass.OWNERSHIP:
            return record.ownership_supply
        return record.economic_supply

    def _debit(self, book: dict[str, int], account_id: str, amount: int) -> None:
        left = book.get(account_id, 0) - amount
        if left:
            book[account_id] = left
        else:
            book.pop(account_id, None)

    def _credit(self, book: dict[str, int], account_id: str, amount: int) -> None:
        if amount:
            book[account_id] = book.get(account_id, 0) + amount

    def check_recipient(self, token_class: TokenClass, recipient: str) -> None:
        """Shared eligibility rule for direct transfers and exchange fills."""
        role = self.role(recipient)
        if token_class is TokenClass.OWNERSHIP and role not in OWNERSHIP_ROLES:
            raise errors.IneligibleRecipient(f"{recipient} ({role.value}) cannot hold ownership tokens")

    def _transfer(self, asset_id: str, token_class: TokenClass, sender: str, recipient: str, amount: int) -> None:
        _check_amount(amount)
        self.active_asset(asset_id)
        self.account(sender)
        self.check_recipient(token_class, recipient)
        book = self.balances[(asset_id, token_class)]
        if book.get(sender, 0) < amount:
            raise errors.InsufficientBalance(f"{sender} holds {book.get(sender, 0)}, needs {amount}")
        self._debit(book, sender, amount)
        self._credit(book, recipient, amount)

    def transfer_economic(self, asset_id: str, sender: str, recipient: str, amount: int) -> None:
        self._transfer(asset_id, TokenClass.ECONOMIC, sender, recipient, amount)

    def transfer_ownership(self, asset_id: str, sender: str, recipient: str, amount: int) -> None:
        self._transfer(asset_id, TokenClass.OWNERSHIP, sender, recipient, amount)

    # escrow hooks for the exchange
    def lock(self, asset_id: str, token_class: TokenClass, seller: str, amount: int) -> None:
        _check_amount(amount)
        self.active_asset(asset_id)
        book = self.balances[(asset_id, token_class)]
        if book.get(seller, 0) < amount:
            raise errors.InsufficientBalance(f"{seller} holds {book.get(seller, 0)}, needs {amount}")
        self._debit(book, seller, amount)
        self._credit(self.escrow[(asset_id, token_class)], seller, amount)

    def unlock(self, asset_id: str, token_class: TokenClass, seller: str, amount: int) -> None:
        self._debit(self.escrow[(asset_id, token_class)], seller, amount)
        self._credit(self.balances[(asset_id, token_class)], seller, amount)

    def settle_escrow(self, asset_id: str, token_class: TokenClass, seller: str, buyer: str, amount: int) -> None:
        self.active_asset(asset_id)
        self.check_recipient(token_class, buyer)
        self._debit(self.escrow[(asset_id, token_class)], seller, amount)
        self._credit(self.balances[(asset_id, token_class)], buyer, amount)

    # ---------------------------------------------------------------- governance
    def power(self, account_id: str, asset_id: str) -> Fraction:
        record = self.asset(asset_id)
        held = self.holdings(asset_id, TokenClass.OWNERSHIP).get(account_id, 0)
        return Fraction(record.merit_weight * held, record.ownership_supply)

    def powers(self, asset_id: str) -> dict[str, Fraction]:
        record = self.asset(asset_id)
        return {
            acct: Fraction(record.merit_weight * held, record.ownership_supply)
            for acct, held in self.holdings(asset_id, TokenClass.OWNERSHIP).items()
        }

    def governance_power(self) -> dict[str, Fraction]:
        """Ecosystem-wide power per account, summed over active assets."""
        total: dict[str, Fraction] = {}
        for asset_id in sorted(self.assets):
            if not self.assets[asset_id].active:
                continue
            for acct, p in self.powers(asset_id).items():
                total[acct] = total.get(acct, Fraction(0)) + p
        return {a: p for a, p in total.items() if p > 0}

    def governors(self) -> set[str]:
        return set(self.governance_power())

    # ---------------------------------------------------------------- retirement
    def retire_asset(self, asset_id: str, approvers: Iterable[str]) -> None:
        record = self.active_asset(asset_id)
        holdings = self.holdings(asset_id, TokenClass.OWNERSHIP)
        distinct = set(approvers)
        for acct in distinct:
            self.account(acct)
        backing = sum(holdings.get(a, 0) for a in distinct)
        if 2 * backing <= record.ownership_supply:
            raise errors.InsufficientMajority(
                f"approvers hold {backing} of {record.ownership_supply} ownership tokens"
            )
        record.state = AssetState.RETIRED

    def has_majority(self, asset_id: str, approvers: Iterable[str]) -> bool:
        record = self.asset(asset_id)
        holdings = self.holdings(asset_id, TokenClass.OWNERSHIP)
        return 2 * sum(holdings.get(a, 0) for a in set(approvers)) > record.ownership_supply

    # ------------------------------------------------------------------- digests
    def _books(self, token_class: TokenClass | None = None) -> dict:
        out = {}
        for (asset_id, cls), book in self.balances.items():
            if token_class is None or cls is token_class:
                out[f"{asset_id}/{cls.value}/free"] = dict(book)
        for (asset_id, cls), book in self.escrow.items():
            if token_class is None or cls is token_class:
                out[f"{asset_id}/{cls.value}/escrow"] = dict(book)
        return out

    def ownership_book_digest(self) -> str:
        return digest(self._books(TokenClass.OWNERSHIP))

    def state(self) -> dict:
        return {
            "accounts": {a.id: a.role.value for a in self.accounts.values()},
            "assets": {k: v.to_dict() for k, v in self.assets.items()},
            "balances": self._books(),
            "contract_hashes": set(self.contract_hashes),
        }
