from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bdaeco import errors
from bdaeco.revenue import PaymentStatus, split_payment

from .conftest import onboard


def disbursement_oracle(report, amount, economic, ownership, fee_bp):
    """Independent check: exact shares via rationals, then the bounds."""
    fee = Fraction(amount * fee_bp, 10_000)
    assert report.treasury_cut == int(fee)
    net = amount - report.treasury_cut
    assert report.total == amount
    econ_sum = sum(report.economic_payouts.values())
    own_sum = sum(report.ownership_payouts.values())
    assert abs(econ_sum - Fraction(net, 2)) < 1 and abs(own_sum - Fraction(net, 2)) < 1
    assert own_sum >= econ_sum
    for payouts, holders, pool in ((report.economic_payouts, economic, econ_sum), (report.ownership_payouts, ownership, own_sum)):
        total = sum(holders.values())
        for acct, held in holders.items():
            assert abs(payouts.get(acct, 0) - Fraction(pool * held, total)) < 1


def test_example_fee_off():
    report = split_payment(100, {"A": 600, "B": 400}, {"O": 100})
    disbursement_oracle(report, 100, {"A": 600, "B": 400}, {"O": 100}, 0)
    assert report.economic_payouts == {"A": 30, "B": 20}
    assert report.ownership_payouts == {"O": 50}
    assert report.treasury_cut == 0


def test_example_fee_on():
    report = split_payment(100, {"A": 600, "B": 400}, {"O": 100}, fee_rate_bp=200)
    disbursement_oracle(report, 100, {"A": 600, "B": 400}, {"O": 100}, 200)
    assert report.treasury_cut == 2
    assert sum(report.economic_payouts.values()) == 49
    assert sum(report.ownership_payouts.values()) == 49
    # 29.4 / 19.6 -> floors 29 / 19, the leftover unit goes to B (.6 > .4)
    assert report.economic_payouts == {"A": 29, "B": 20}


def test_example_single_unit():
    report = split_payment(1, {"E": 10}, {"O": 10})
    disbursement_oracle(report, 1, {"E": 10}, {"O": 10}, 0)
    assert report.economic_payouts == {"E": 0}
    assert report.ownership_payouts == {"O": 1}
    assert report.remainder_assignee == "O"


def test_rows_are_flat_records():
    report = split_payment(100, {"A": 600, "B": 400}, {"O": 100}, fee_rate_bp=200, payment_id="p1")
    assert report.rows() == [
        ("p1", "Treasury", "treasury", 2),
        ("p1", "Economic", "A", 29),
        ("p1", "Economic", "B", 20),
        ("p1", "Ownership", "O", 49),
    ]


holders = st.dictionaries(st.text("abcdefgh", min_size=1, max_size=3), st.integers(1, 10**6), min_size=1, max_size=50)


@settings(max_examples=300)
@given(st.integers(1, 10**6), holders, holders, st.sampled_from([0, 200, 150, 10_000]))
def test_split_payment_properties(amount, econ, own, fee):
    disbursement_oracle(split_payment(amount, econ, own, fee), amount, econ, own, fee)


@given(st.integers(1, 10**5), holders, st.data())
def test_payout_monotone_in_balance(amount, econ, data):
    who = data.draw(st.sampled_from(sorted(econ)))
    more = dict(econ, **{who: econ[who] + data.draw(st.integers(1, 1000))})
    before = split_payment(amount, econ, {"O": 1}).economic_payouts[who]
    after = split_payment(amount, more, {"O": 1}).economic_payouts[who]
    assert after >= before


class TestPaymentFlow:
    @pytest.fixture
    def priced(self, world, asset):
        world.set_price(asset, "materials", 100, ["A"])
        world.deposit("K", 1000)
        return asset

    def test_pay_and_confirm(self, world, priced):
        pid = world.pay_asset("K", priced, 100, "materials")
        assert world.revenue.payments[pid].status is PaymentStatus.RECEIVED
        assert world.confirm_payment(priced, "K", "materials")
        assert world.confirm_payment(priced, "K", "materials")  # idempotent

    def test_no_payment_confirms_false(self, world, priced):
        assert not world.confirm_payment(priced, "K", "materials")

    def test_other_component_not_confirmed(self, world, priced):
        world.set_price(priced, "electricity", 5, ["A"])
        world.pay_asset("K", priced, 100, "materials")
        assert not world.confirm_payment(priced, "K", "electricity")

    def test_underpayment(self, world, priced):
        with pytest.raises(errors.Underpayment):
            world.pay_asset("K", priced, 99, "materials")

    def test_retired(self, world, priced):
        world.retire_asset(priced, ["A"])
        with pytest.raises(errors.AssetRetired):
            world.pay_asset("K", priced, 100, "materials")

    def test_unpriced_component(self, world, priced):
        with pytest.raises(errors.UnknownComponent):
            world.pay_asset("K", priced, 100, "nothing")

    def test_insufficient_funds(self, world, priced):
        with pytest.raises(errors.InsufficientFunds):
            world.pay_asset("K", priced, 2000, "materials")

    def test_price_needs_majority(self, world, priced):
        with pytest.raises(errors.InsufficientMajority):
            world.set_price(priced, "materials", 1, ["B"])

    def test_distribute_pays_holders(self, world, priced):
        world.transfer_economic(priced, "A", "I", 100)
        pid = world.pay_asset("K", priced, 100, "materials")
        report = world.distribute(pid)
        # economic A 500 / B 400 / I 100; ownership A 60 / B 40
        assert report.economic_payouts == {"A": 25, "B": 20, "I": 5}
        assert report.ownership_payouts == {"A": 30, "B": 20}
        assert world.revenue.cash_balance("I") == 5
        assert world.revenue.payments[pid].status is PaymentStatus.DISBURSED

    def test_distribute_twice(self, world, priced):
        pid = world.pay_asset("K", priced, 100, "materials")
        world.distribute(pid)
        before = world.state_digest()
        with pytest.raises(errors.AlreadyDisbursed):
            world.distribute(pid)
        assert world.state_digest() == before

    def test_unknown_payment(self, world):
        with pytest.raises(errors.UnknownPayment):
            world.distribute("pay-999999")

    def test_fee_only_when_active(self, world, priced):
        world.revenue.treasury.active = True
        report = world.distribute(world.pay_asset("K", priced, 100, "materials"))
        assert report.treasury_cut == 2
        assert world.revenue.treasury.balance == 2

    def test_cash_conserved(self, world, priced):
        for _ in range(3):
            world.distribute(world.pay_asset("K", priced, 137, "materials"))
        world.pay_asset("K", priced, 100, "materials")
        total = sum(world.revenue.cash.values()) + world.revenue.pending() + world.revenue.treasury.balance
        assert total == 1000


def test_escrowed_economic_tokens_still_earn(world):
    a = onboard(world, {"A": 100}, 100, 100)
    world.set_price(a, "c", 10, ["A"])
    world.deposit("K", 100)
    world.list_tokens("A", a, "Economic", 50, 1)
    report = world.distribute(world.pay_asset("K", a, 10, "c"))
    assert report.economic_payouts == {"A": 5}
