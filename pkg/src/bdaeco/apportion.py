"""Largest-remainder apportionment of integer amounts."""

from __future__ import annotations

from collections.abc import Mapping


def largest_remainder(amount: int, weights: Mapping[str, int]) -> dict[str, int]:
    """Split ``amount`` over ``weights`` so that the parts sum to ``amount``.

    Each key first receives ``floor(amount * w / W)``.  The leftover units go
    one each to the keys with the largest fractional remainders; equal
    remainders are broken by ascending key.  Keys with zero weight receive 0.

    >>> largest_remainder(100, {"A": 600, "B": 400})
    {'A': 60, 'B': 40}
    >>> largest_remainder(49, {"A": 600, "B": 400})
    {'A': 29, 'B': 20}
    """
    if amount < 0:
        raise ValueError("amount must be non-negative")
    if any(w < 0 for w in weights.values()):
        raise ValueError("weights must be non-negative")
    total = sum(weights.values())
    if total == 0:
        if amount:
            raise ValueError("cannot apportion a positive amount over zero weight")
        return {k: 0 for k in weights}

    parts: dict[str, int] = {}
    remainders: list[tuple[int, str]] = []
    for key, w in weights.items():
        q, r = divmod(amount * w, total)
        parts[key] = q
        if w:
            remainders.append((r, key))
    leftover = amount - sum(parts.values())
    remainders.sort(key=lambda rk: (-rk[0], rk[1]))
    for _, key in remainders[:leftover]:
        parts[key] += 1
    return parts


def residue_order(amount: int, weights: Mapping[str, int]) -> list[str]:
    """Keys that receive a leftover unit, in award order."""
    total = sum(weights.values())
    if total == 0:
        return []
    remainders = sorted(
        ((amount * w % total, k) for k, w in weights.items() if w),
        key=lambda rk: (-rk[0], rk[1]),
    )
    leftover = amount - sum(amount * w // total for w in weights.values())
    return [k for _, k in remainders[:leftover]]
