"""Keyword search over asset metadata and a fixed-price escrow exchange."""

from __future__ import annotations

import re
from collections.abc import Iterable
from dataclasses import dataclass, field
from enum import Enum

from . import errors
from .ledger import Ledger, TokenClass
from .revenue import Revenue

_TERM = re.compile(r"[a-z0-9]+")


def normalize_terms(text: str | Iterable[str]) -> set[str]:
    if not isinstance(text, str):
        text = " ".join(text)
    return set(_TERM.findall(text.lower()))


class ListingState(str, Enum):
    OPEN = "Open"
    FILLED = "Filled"
    CANCELLED = "Cancelled"


@dataclass
class Listing:
    listing_id: str
    seller: str
    asset_id: str
    token_class: TokenClass
    amount: int
    unit_price: int
    state: ListingState = ListingState.OPEN
    buyer: str | None = None

    @property
    def price(self) -> int:
        return self.amount * self.unit_price

    def to_dict(self) -> dict:
        return {
            "listing_id": self.listing_id,
            "seller": self.seller,
            "asset_id": self.asset_id,
            "token_class": self.token_class.value,
            "amount": self.amount,
            "unit_price": self.unit_price,
            "state": self.state.value,
            "buyer": self.buyer,
        }


@dataclass(frozen=True)
class Settlement:
    listing_id: str
    buyer: str
    seller: str
    asset_id: str
    token_class: TokenClass
    amount: int
    paid: int


@dataclass
class Market:
    ledger: Ledger
    revenue: Revenue
    index: dict[str, set[str]] = field(default_factory=dict)
    listings: dict[str, Listing] = field(default_factory=dict)
    _next_listing: int = 1

    # ------------------------------------------------------------------ search
    def index_component(self, asset_id: str, component_ref: str, tags: Iterable[str] = ()) -> None:
        if not self.ledger.asset(asset_id).active:
            return
        terms = normalize_terms(component_ref) | normalize_terms(list(tags))
        self.index.setdefault(asset_id, set()).update(terms)

    def drop(self, asset_id: str) -> None:
        self.index.pop(asset_id, None)

    def search(self, query: str | Iterable[str]) -> list[str]:
        terms = normalize_terms(query)
        return sorted(
            asset_id
            for asset_id, keywords in self.index.items()
            if keywords & terms and self.ledger.asset(asset_id).active
        )

    # ---------------------------------------------------------------- exchange
    def list_tokens(
        self, seller: str, asset_id: str, token_class: TokenClass | str, amount: int, unit_price: int
    ) -> str:
        token_class = TokenClass(token_class)
        self.ledger.account(seller)
        if not isinstance(amount, int) or amount <= 0:
            raise errors.InvalidAmount("listing amount must be a positive integer")
        if not isinstance(unit_price, int) or unit_price < 0:
            raise errors.InvalidAmount("unit price must be a non-negative integer")
        if token_class is TokenClass.OWNERSHIP:
            # sell side must itself be a permissible ownership holder
            self.ledger.check_recipient(token_class, seller)
        self.ledger.lock(asset_id, token_class, seller, amount)
        listing_id = f"lst-{self._next_listing:06d}"
        self._next_listing += 1
        self.listings[listing_id] = Listing(listing_id, seller, asset_id, token_class, amount, unit_price)
        return listing_id

    def listing(self, listing_id: str) -> Listing:
        try:
            return self.listings[listing_id]
        except KeyError:
            raise errors.UnknownListing(listing_id) from None

    def cancel_listing(self, listing_id: str, seller: str) -> None:
        listing = self.listing(listing_id)
        if listing.state is not ListingState.OPEN:
            raise errors.ListingClosed(listing_id)
        if listing.seller != seller:
            raise errors.NotListingSeller(f"{seller} did not create {listing_id}")
        self.ledger.unlock(listing.asset_id, listing.token_class, listing.seller, listing.amount)
        listing.state = ListingState.CANCELLED

    def take_listing(self, buyer: str, listing_id: str, pay_amount: int) -> Settlement:
        listing = self.listing(listing_id)
        if listing.state is not ListingState.OPEN:
            raise errors.ListingClosed(listing_id)
        self.ledger.active_asset(listing.asset_id)
        self.ledger.check_recipient(listing.token_class, buyer)
        if pay_amount != listing.price:
            raise errors.WrongPayment(f"listing costs {listing.price}, offered {pay_amount}")
        if self.revenue.cash_balance(buyer) < pay_amount:
            raise errors.InsufficientFunds(f"{buyer} cannot cover {pay_amount}")
        # all checks passed; both legs below cannot fail
        self.revenue.move_cash(buyer, listing.seller, pay_amount)
        self.ledger.settle_escrow(listing.asset_id, listing.token_class, listing.seller, buyer, listing.amount)
        listing.state = ListingState.FILLED
        listing.buyer = buyer
        return Settlement(
            listing_id, buyer, listing.seller, listing.asset_id, listing.token_class, listing.amount, pay_amount
        )

    def escrow_total(self, asset_id: str, token_class: TokenClass) -> int:
        return sum(
            l.amount
            for l in self.listings.values()
            if l.state is ListingState.OPEN and l.asset_id == asset_id and l.token_class is token_class
        )

    def state(self) -> dict:
        return {
            "index": {a: set(t) for a, t in self.index.items()},
            "listings": {k: v.to_dict() for k, v in self.listings.items()},
        }
