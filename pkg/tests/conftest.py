from __future__ import annotations

import pytest

from bdaeco import World


def onboard(world: World, split: dict[str, int], economic: int = 1000, merit: int | None = None, tag: str = "x",
            asset_id: str | None = None) -> str:
    """Onboard an asset certified by ``cert`` and minted by ``tok``."""
    contract = world.make_contract(
        split,
        economic,
        "cert",
        merit_weight=merit,
        datastore_ref=f"ds://{tag}",
        data_digest=f"data-{tag}",
        timestamp=1,
    )
    return world.onboard_asset(contract, "tok", asset_id)


@pytest.fixture
def world() -> World:
    w = World(seed=11)
    for acct, role in [
        ("A", "BuildingOwner"),
        ("B", "BuildingOwner"),
        ("C", "AssetCompany"),
        ("I", "Investor"),
        ("J", "Investor"),
        ("K", "Consumer"),
        ("cert", "Certifier"),
        ("tok", "Tokeniser"),
    ]:
        w.register_account(role, acct)
    return w


@pytest.fixture
def asset(world: World) -> str:
    """A 60/40 asset owned by A and B, merit 100, economic supply 1000."""
    return onboard(world, {"A": 60, "B": 40}, 1000, 100, asset_id="bldg")
