"""Registry-backed attestations.

A stand-in for real signatures: every identity gets an HMAC key derived from
the world seed, and an :class:`Attestation` is valid when its MAC matches the
signer's key over the message.  Verification is deterministic and has no side
effects.  Swapping in an anonymous-credential scheme only requires another
object with the same ``sign``/``verify`` surface.
"""

from __future__ import annotations

import hashlib
import hmac
from dataclasses import dataclass
from typing import Any

from .canonical import encode


@dataclass(frozen=True)
class Attestation:
    signer: str
    mac: str

    def to_dict(self) -> dict[str, str]:
        return {"signer": self.signer, "mac": self.mac}

    @classmethod
    def from_dict(cls, data: dict[str, str]) -> "Attestation":
        return cls(signer=str(data["signer"]), mac=str(data["mac"]))


class KeyRing:
    def __init__(self, seed: int = 0):
        self._root = hashlib.sha256(b"bdaeco-keyring" + (seed % 2**64).to_bytes(8, "big")).digest()

    def _key(self, identity: str) -> bytes:
        return hmac.new(self._root, identity.encode("utf-8"), hashlib.sha256).digest()

    def sign(self, identity: str, message: Any) -> Attestation:
        mac = hmac.new(self._key(identity), encode(message), hashlib.sha256).hexdigest()
        return Attestation(identity, mac)

    def verify(self, attestation: Attestation, message: Any) -> bool:
        expected = hmac.new(self._key(attestation.signer), encode(message), hashlib.sha256).hexdigest()
        return hmac.compare_digest(expected, attestation.mac)
