import pytest

from bdaeco import errors
from bdaeco.datastore import payload_digest

MATERIALS = {"concrete_m3": 420, "steel_t": 35, "site_contact": "J. Doe"}


@pytest.fixture
def stocked(world, asset):
    world.store_component(asset, "materials", MATERIALS, {"site_contact": "jdoe"}, certifier="cert", tags=["recycling"])
    world.set_price(asset, "materials", 100, ["A"])
    world.deposit("K", 1000)
    return asset


def test_first_store_is_version_one(world, asset):
    assert world.store_component(asset, "materials", {"a": 1}, certifier="cert") == 1


def test_restore_bumps_version_and_supersedes(world, stocked):
    assert world.store_component(stocked, "materials", {"concrete_m3": 400}, certifier="cert") == 2
    world.pay_asset("K", stocked, 100, "materials")
    payload, _ = world.request_information("K", stocked, "materials")
    assert payload == {"concrete_m3": 400}


def test_bad_certification(world, asset):
    cert = world.certify_component("cert", asset, "materials", {"other": 1})
    with pytest.raises(errors.BadCertification):
        world.store_component(asset, "materials", {"a": 1}, cert=cert)
    with pytest.raises(errors.BadCertification):
        world.store_component(asset, "materials", {"a": 1}, certifier="A")  # A is no certifier
    assert world.datastore.components == {}


def test_store_on_retired_asset(world, asset):
    world.retire_asset(asset, ["A"])
    with pytest.raises(errors.AssetRetired):
        world.store_component(asset, "materials", {"a": 1}, certifier="cert")


def test_personal_fields_must_exist(world, asset):
    with pytest.raises(errors.MalformedComponent):
        world.store_component(asset, "m", {"a": 1}, {"b": "x"}, certifier="cert")


def test_paid_request_releases_payload_and_licence(world, stocked):
    pid = world.pay_asset("K", stocked, 100, "materials")
    payload, licence = world.request_information("K", stocked, "materials")
    assert payload == MATERIALS
    assert licence.use_only
    assert (licence.consumer, licence.asset_id, licence.component_ref, licence.payment_id) == ("K", stocked, "materials", pid)


def test_unpaid_request(world, stocked):
    with pytest.raises(errors.PaymentNotFound):
        world.request_information("K", stocked, "materials")


def test_payment_is_single_use(world, stocked):
    world.pay_asset("K", stocked, 100, "materials")
    world.request_information("K", stocked, "materials")
    assert not world.confirm_payment(stocked, "K", "materials")
    with pytest.raises(errors.PaymentNotFound):
        world.request_information("K", stocked, "materials")
    # oracle replay: releases never exceed payments for the key
    assert len(world.datastore.licences) == 1 == len(world.revenue.payments)


def test_released_payload_is_a_copy(world, stocked):
    world.pay_asset("K", stocked, 100, "materials")
    payload, _ = world.request_information("K", stocked, "materials")
    payload["steel_t"] = 0
    assert world.datastore.latest(stocked, "materials").payload["steel_t"] == 35


def test_distributed_payment_still_releases(world, stocked):
    pid = world.pay_asset("K", stocked, 100, "materials")
    world.distribute(pid)
    world.request_information("K", stocked, "materials")


def test_unknown_component(world, stocked):
    world.set_price(stocked, "ghost", 1, ["A"])
    world.pay_asset("K", stocked, 1, "ghost")
    with pytest.raises(errors.UnknownComponent):
        world.request_information("K", stocked, "ghost")
    assert world.confirm_payment(stocked, "K", "ghost")  # not consumed by the failed request


def test_request_on_retired(world, stocked):
    world.pay_asset("K", stocked, 100, "materials")
    world.retire_asset(stocked, ["A"])
    with pytest.raises(errors.AssetRetired):
        world.request_information("K", stocked, "materials")
    assert stocked in world.datastore.pending_deletion


class TestForget:
    def test_counts_components(self, world, stocked):
        world.store_component(stocked, "occupants", {"tenant": "J. Doe", "units": 4}, {"tenant": "jdoe"}, certifier="cert")
        assert world.forget("jdoe") == 2

    def test_unknown_subject(self, world, stocked):
        before = world.state_digest()
        assert world.forget("nobody") == 0
        assert world.state_digest() == before

    def test_round_trip(self, world, stocked):
        world.forget("jdoe")
        world.pay_asset("K", stocked, 100, "materials")
        payload, _ = world.request_information("K", stocked, "materials")
        assert "site_contact" not in payload
        assert payload == {"concrete_m3": 420, "steel_t": 35}

    def test_all_versions_redacted(self, world, stocked):
        world.store_component(stocked, "materials", {"steel_t": 1, "site_contact": "J. Doe"}, {"site_contact": "jdoe"}, certifier="cert")
        assert world.forget("jdoe") == 1
        for v in world.datastore.components[(stocked, "materials")]:
            assert "site_contact" not in v.payload

    def test_reanchors_audit(self, world, stocked):
        before = len(world.audit_digest(stocked))
        world.forget("jdoe")
        trail = world.audit_digest(stocked)
        assert len(trail) == before + 1
        assert trail[-1].note == "redacted"
        assert trail[-1].digest == payload_digest({"concrete_m3": 420, "steel_t": 35})
        assert world.datastore.verify_audit(stocked) == []


class TestAudit:
    def test_empty(self, world, asset):
        assert world.audit_digest(asset) == []

    def test_versions_ascending(self, world, asset):
        world.store_component(asset, "m", {"a": 1}, certifier="cert")
        world.store_component(asset, "m", {"a": 2}, certifier="cert")
        trail = world.audit_digest(asset)
        assert [(e.component_ref, e.version) for e in trail] == [("m", 1), ("m", 2)]
        assert [e.digest for e in trail] == [payload_digest({"a": 1}), payload_digest({"a": 2})]

    def test_tamper_detected(self, world, stocked):
        assert world.datastore.verify_audit(stocked) == []
        world.datastore._tamper(stocked, "materials", {"concrete_m3": 1})
        assert world.datastore.verify_audit(stocked) == [("materials", 1)]

    def test_payload_never_logged(self, world, asset):
        world.apply("store_component", {"asset_id": asset, "component_ref": "m", "payload": {"secret": "s3cr3t-value"},
                                        "certifier": "cert"})
        assert "s3cr3t" not in repr(world.log)

    def test_manifest(self, world, stocked):
        rows = world.datastore.manifest(stocked)
        assert [(r[1], r[2], r[3]) for r in rows] == [("materials", 1, payload_digest(MATERIALS))]
