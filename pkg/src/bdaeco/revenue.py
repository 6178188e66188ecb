"""Consumer payments, currency balances, treasury and 50/50 disbursement."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

from . import errors
from .apportion import largest_remainder
from .ledger import Ledger, TokenClass

DEFAULT_FEE_RATE_BP = 200
BP = 10_000


class PaymentStatus(str, Enum):
    RECEIVED = "Received"
    DISBURSED = "Disbursed"


@dataclass
class PaymentRecord:
    payment_id: str
    asset_id: str
    consumer: str
    amount: int
    component_ref: str
    status: PaymentStatus = PaymentStatus.RECEIVED
    released: bool = False

    def to_dict(self) -> dict:
        return {
            "payment_id": self.payment_id,
            "asset_id": self.asset_id,
            "consumer": self.consumer,
            "amount": self.amount,
            "component_ref": self.component_ref,
            "status": self.status.value,
            "released": self.released,
        }


@dataclass(frozen=True)
class DisbursementReport:
    payment_id: str
    amount: int
    treasury_cut: int
    economic_payouts: dict[str, int]
    ownership_payouts: dict[str, int]
    remainder_assignee: str | None

    def rows(self) -> list[tuple[str, str, str, int]]:
        """Flat records ``(payment_id, class, account, amount)``."""
        out = []
        if self.treasury_cut:
            out.append((self.payment_id, "Treasury", "treasury", self.treasury_cut))
        for acct in sorted(self.economic_payouts):
            out.append((self.payment_id, TokenClass.ECONOMIC.value, acct, self.economic_payouts[acct]))
        for acct in sorted(self.ownership_payouts):
            out.append((self.payment_id, TokenClass.OWNERSHIP.value, acct, self.ownership_payouts[acct]))
        return out

    @property
    def total(self) -> int:
        return self.treasury_cut + sum(self.economic_payouts.values()) + sum(self.ownership_payouts.values())


def split_payment(
    amount: int,
    economic: dict[str, int],
    ownership: dict[str, int],
    fee_rate_bp: int = 0,
    payment_id: str = "",
) -> DisbursementReport:
    """Pure disbursement rule.

    The fee (floor of ``amount * fee_rate_bp / 10000``) goes to the treasury.
    Of the rest, the economic pool gets the floor half and the ownership pool
    the ceiling half; each pool is apportioned by largest remainder over the
    holders' token counts.
    """
    treasury_cut = amount * fee_rate_bp // BP
    net = amount - treasury_cut
    economic_pool = net // 2
    ownership_pool = net - economic_pool
    econ = largest_remainder(economic_pool, economic)
    own = largest_remainder(ownership_pool, ownership)
    assignee = None
    if net % 2:
        # the holder who gains from the odd unit landing in the ownership pool
        smaller = largest_remainder(ownership_pool - 1, ownership)
        assignee = min(k for k in own if own[k] > smaller[k])
    return DisbursementReport(
        payment_id=payment_id,
        amount=amount,
        treasury_cut=treasury_cut,
        economic_payouts=econ,
        ownership_payouts=own,
        remainder_assignee=assignee,
    )


@dataclass
class Treasury:
    balance: int = 0
    fee_rate_bp: int = DEFAULT_FEE_RATE_BP
    active: bool = False

    @property
    def effective_rate_bp(self) -> int:
        return self.fee_rate_bp if self.active else 0


@dataclass
class Revenue:
    ledger: Ledger
    cash: dict[str, int] = field(default_factory=dict)
    prices: dict[tuple[str, str], int] = field(default_factory=dict)
    payments: dict[str, PaymentRecord] = field(default_factory=dict)
    reports: dict[str, DisbursementReport] = field(default_factory=dict)
    treasury: Treasury = field(default_factory=Treasury)
    # (asset, consumer, component) -> unreleased payment ids, oldest first
    _unreleased: dict[tuple[str, str, str], list[str]] = field(default_factory=dict)
    _next_payment: int = 1

    # --------------------------------------------------------------- currency
    def deposit(self, account_id: str, amount: int) -> int:
        """Credit currency from outside the ecosystem (fiat on-ramp)."""
        self.ledger.account(account_id)
        if not isinstance(amount, int) or amount <= 0:
            raise errors.InvalidAmount("deposit must be a positive integer")
        self.cash[account_id] = self.cash.get(account_id, 0) + amount
        return self.cash[account_id]

    def cash_balance(self, account_id: str) -> int:
        return self.cash.get(account_id, 0)

    def move_cash(self, payer: str, payee: str, amount: int) -> None:
        if self.cash.get(payer, 0) < amount:
            raise errors.InsufficientFunds(f"{payer} has {self.cash.get(payer, 0)}, needs {amount}")
        self.cash[payer] -= amount
        self.cash[payee] = self.cash.get(payee, 0) + amount

    # ------------------------------------------------------------------ prices
    def set_price(self, asset_id: str, component_ref: str, price: int, approvers: Iterable[str]) -> None:
        """List a component price; needs a strict ownership majority."""
        self.ledger.active_asset(asset_id)
        if not isinstance(price, int) or price <= 0:
            raise errors.InvalidAmount("price must be a positive integer")
        approvers = list(approvers)
        for acct in approvers:
            self.ledger.account(acct)
        if not self.ledger.has_majority(asset_id, approvers):
            raise errors.InsufficientMajority("price change needs a strict ownership majority")
        self.prices[(asset_id, component_ref)] = price

    def price(self, asset_id: str, component_ref: str) -> int:
        try:
            return self.prices[(asset_id, component_ref)]
        except KeyError:
            raise errors.UnknownComponent(f"{asset_id}/{component_ref} has no listed price") from None

    # ---------------------------------------------------------------- payments
    def pay_asset(self, consumer: str, asset_id: str, amount: int, component_ref: str) -> str:
        self.ledger.account(consumer)
        self.ledger.active_asset(asset_id)
        if not isinstance(amount, int) or isinstance(amount, bool) or amount <= 0:
            raise errors.InvalidAmount("payment must be a positive integer")
        listed = self.price(asset_id, component_ref)
        if amount < listed:
            raise errors.Underpayment(f"paid {amount}, price is {listed}")
        if self.cash.get(consumer, 0) < amount:
            raise errors.InsufficientFunds(f"{consumer} has {self.cash.get(consumer, 0)}, needs {amount}")
        self.cash[consumer] -= amount
        payment_id = f"pay-{self._next_payment:06d}"
        self._next_payment += 1
        self.payments[payment_id] = PaymentRecord(payment_id, asset_id, consumer, amount, component_ref)
        self._unreleased.setdefault((asset_id, consumer, component_ref), []).append(payment_id)
        return payment_id

    def confirm_payment(self, asset_id: str, consumer: str, component_ref: str) -> bool:
        """True iff an unreleased payment matches; does not consume it."""
        return bool(self._unreleased.get((asset_id, consumer, component_ref)))

    def consume_payment(self, asset_id: str, consumer: str, component_ref: str) -> str:
        """Mark the oldest matching payment as used for an information release."""
        queue = self._unreleased.get((asset_id, consumer, component_ref))
        if not queue:
            raise errors.PaymentNotFound(f"no payment by {consumer} for {asset_id}/{component_ref}")
        payment_id = queue.pop(0)
        if not queue:
            del self._unreleased[(asset_id, consumer, component_ref)]
        self.payments[payment_id].released = True
        return payment_id

    def pending(self) -> int:
        return sum(p.amount for p in self.payments.values() if p.status is PaymentStatus.RECEIVED)

    # ------------------------------------------------------------ disbursement
    def distribute(self, payment_id: str) -> DisbursementReport:
        try:
            payment = self.payments[payment_id]
        except KeyError:
            raise errors.UnknownPayment(payment_id) from None
        if payment.status is PaymentStatus.DISBURSED:
            raise errors.AlreadyDisbursed(payment_id)
        report = split_payment(
            payment.amount,
            self.ledger.holdings(payment.asset_id, TokenClass.ECONOMIC),
            self.ledger.holdings(payment.asset_id, TokenClass.OWNERSHIP),
            self.treasury.effective_rate_bp,
            payment_id,
        )
        self.treasury.balance += report.treasury_cut
        for payouts in (report.economic_payouts, report.ownership_payouts):
            for acct, amount in payouts.items():
                if amount:
                    self.cash[acct] = self.cash.get(acct, 0) + amount
        payment.status = PaymentStatus.DISBURSED
        self.reports[payment_id] = report
        return report

    # ---------------------------------------------------------------- treasury
    def spend_treasury(self, grants: list[tuple[str, int]]) -> None:
        total = sum(a for _, a in grants)
        if total > self.treasury.balance:
            raise errors.InsufficientTreasury(f"needs {total}, treasury holds {self.treasury.balance}")
        self.treasury.balance -= total
        for acct, amount in grants:
            self.cash[acct] = self.cash.get(acct, 0) + amount

    def state(self) -> dict:
        return {
            "cash": {a: n for a, n in self.cash.items() if n},
            "prices": {f"{a}/{c}": p for (a, c), p in self.prices.items()},
            "payments": {k: v.to_dict() for k, v in self.payments.items()},
            "treasury": {
                "balance": self.treasury.balance,
                "fee_rate_bp": self.treasury.fee_rate_bp,
                "active": self.treasury.active,
            },
        }
