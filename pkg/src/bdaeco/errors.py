"""Exception hierarchy.

Every rejection raised by a world operation derives from
:class:`EcosystemError`.  The class name doubles as the outcome tag used in
scenario files (``"expect": "InsufficientBalance"``).
"""

from __future__ import annotations


class EcosystemError(Exception):
    """Base class for rejected commands."""

    @property
    def code(self) -> str:
        return type(self).__name__


# registry / ledger
class UnknownAccount(EcosystemError):
    pass


class DuplicateAccount(EcosystemError):
    pass


class UnknownAsset(EcosystemError):
    pass


class DuplicateAsset(EcosystemError):
    pass


class WrongRole(EcosystemError):
    pass


class BadSignature(EcosystemError):
    pass


class SplitMismatch(EcosystemError):
    pass


class MalformedContract(EcosystemError):
    pass


class InsufficientBalance(EcosystemError):
    pass


class InsufficientFunds(EcosystemError):
    """Currency (not token) balance too low."""


class AssetRetired(EcosystemError):
    pass


class IneligibleRecipient(EcosystemError):
    pass


class InsufficientMajority(EcosystemError):
    pass


class InvalidAmount(EcosystemError):
    pass


# revenue
class Underpayment(EcosystemError):
    pass


class UnknownPayment(EcosystemError):
    pass


class AlreadyDisbursed(EcosystemError):
    pass


# datastore
class BadCertification(EcosystemError):
    pass


class UnknownComponent(EcosystemError):
    pass


class MalformedComponent(EcosystemError):
    pass


class PaymentNotFound(EcosystemError):
    pass


# market
class UnknownListing(EcosystemError):
    pass


class ListingClosed(EcosystemError):
    pass


class WrongPayment(EcosystemError):
    pass


class NotListingSeller(EcosystemError):
    pass


# governance
class UnknownProposal(EcosystemError):
    pass


class NotAGovernor(EcosystemError):
    pass


class MalformedPayload(EcosystemError):
    pass


class ProposalClosed(EcosystemError):
    pass


class NotAccepted(EcosystemError):
    pass


class InsufficientTreasury(EcosystemError):
    pass


# tension meter
class StaleInterval(EcosystemError):
    pass


class BadProof(EcosystemError):
    pass


class BadChoice(EcosystemError):
    pass


class OutOfScope(EcosystemError):
    pass


class UnknownInterval(EcosystemError):
    """The failed-check path of the interval tally (``-1`` sentinel)."""

    sentinel = -1


class IntervalStillOpen(EcosystemError):
    pass


class BadTrigger(EcosystemError):
    pass


class UnknownStabilityProposal(EcosystemError):
    pass


class MalformedStabilityProposal(EcosystemError):
    pass


class UnknownStakeholder(EcosystemError):
    pass


# scenario runner
class ParseError(EcosystemError):
    pass


class AssertionFailure(EcosystemError):
    pass


class IoFailure(EcosystemError):
    pass


class UnknownOperation(EcosystemError):
    pass
