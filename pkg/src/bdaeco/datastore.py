"""Off-ledger component storage with payment-gated release.

Payloads are JSON-like mappings.  Only their digests leave this module: the
audit trail records ``(component_ref, version, digest, cert)`` anchors and is
append-only.  Redaction under :meth:`Datastore.forget` rewrites stored
payloads in place and appends a fresh anchor marked ``redacted`` rather than
editing older anchors.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any

from . import errors
from .canonical import digest
from .keys import Attestation
from .ledger import Ledger
from .revenue import Revenue


def component_message(asset_id: str, component_ref: str, payload_digest: str) -> tuple:
    return ("component-certificate", asset_id, component_ref, payload_digest)


def payload_digest(payload: dict[str, Any]) -> str:
    return digest(payload)


def cert_id(cert: Attestation) -> str:
    return digest(cert.to_dict())[:16]


@dataclass
class ComponentVersion:
    version: int
    payload: dict[str, Any]
    personal_fields: dict[str, str]  # field name -> subject key
    cert: Attestation
    tags: tuple[str, ...] = ()


@dataclass(frozen=True)
class AuditEntry:
    component_ref: str
    version: int
    digest: str
    cert: str
    note: str = "stored"
    seq: int = 0


@dataclass(frozen=True)
class AccessLicence:
    licence_id: str
    consumer: str
    asset_id: str
    component_ref: str
    payment_id: str
    issued_at: int
    use_only: bool = True  # resale prohibited

    def to_dict(self) -> dict:
        return {
            "licence_id": self.licence_id,
            "consumer": self.consumer,
            "asset_id": self.asset_id,
            "component_ref": self.component_ref,
            "payment_id": self.payment_id,
            "issued_at": self.issued_at,
            "use_only": self.use_only,
        }


@dataclass
class Datastore:
    ledger: Ledger
    revenue: Revenue
    components: dict[tuple[str, str], list[ComponentVersion]] = field(default_factory=dict)
    audit: dict[str, list[AuditEntry]] = field(default_factory=dict)
    licences: dict[str, AccessLicence] = field(default_factory=dict)
    pending_deletion: set[str] = field(default_factory=set)
    _next_licence: int = 1
    _seq: int = 0

    def _anchor(self, asset_id: str, ref: str, v: ComponentVersion, note: str) -> None:
        self._seq += 1
        entry = AuditEntry(ref, v.version, payload_digest(v.payload), cert_id(v.cert), note, self._seq)
        self.audit.setdefault(asset_id, []).append(entry)

    def store_component(
        self,
        asset_id: str,
        component_ref: str,
        payload: dict[str, Any],
        personal_fields: dict[str, str] | None,
        cert: Attestation,
        tags: tuple[str, ...] | list[str] = (),
    ) -> int:
        self.ledger.active_asset(asset_id)
        if not isinstance(payload, dict) or not component_ref:
            raise errors.MalformedComponent("payload must be a mapping and component_ref non-empty")
        personal = dict(personal_fields or {})
        missing = set(personal) - set(payload)
        if missing:
            raise errors.MalformedComponent(f"personal fields not in payload: {sorted(missing)}")
        message = component_message(asset_id, component_ref, payload_digest(payload))
        if not self.ledger.verify_certificate(cert, message):
            raise errors.BadCertification(f"certificate for {asset_id}/{component_ref} does not verify")
        history = self.components.setdefault((asset_id, component_ref), [])
        v = ComponentVersion(len(history) + 1, copy.deepcopy(payload), personal, cert, tuple(tags))
        history.append(v)
        self._anchor(asset_id, component_ref, v, "stored")
        return v.version

    def latest(self, asset_id: str, component_ref: str) -> ComponentVersion:
        history = self.components.get((asset_id, component_ref))
        if not history:
            raise errors.UnknownComponent(f"{asset_id}/{component_ref}")
        return history[-1]

    def component_refs(self, asset_id: str) -> list[str]:
        return sorted(ref for (a, ref) in self.components if a == asset_id)

    def request_information(
        self, consumer: str, asset_id: str, component_ref: str, issued_at: int = 0
    ) -> tuple[dict[str, Any], AccessLicence]:
        self.ledger.account(consumer)
        self.ledger.active_asset(asset_id)
        latest = self.latest(asset_id, component_ref)
        payment_id = self.revenue.consume_payment(asset_id, consumer, component_ref)
        licence = AccessLicence(
            licence_id=f"lic-{self._next_licence:06d}",
            consumer=consumer,
            asset_id=asset_id,
            component_ref=component_ref,
            payment_id=payment_id,
            issued_at=issued_at,
        )
        self._next_licence += 1
        self.licences[licence.licence_id] = licence
        return copy.deepcopy(latest.payload), licence

    def forget(self, subject_key: str) -> int:
        """Erase every personal field tagged with ``subject_key``.

        Returns the number of distinct ``(asset, component, field)`` slots
        redacted.
        """
        redacted: set[tuple[str, str, str]] = set()
        for (asset_id, ref), history in sorted(self.components.items()):
            for v in history:
                doomed = sorted(f for f, s in v.personal_fields.items() if s == subject_key)
                if not doomed:
                    continue
                for f in doomed:
                    v.payload.pop(f, None)
                    del v.personal_fields[f]
                    redacted.add((asset_id, ref, f))
                self._anchor(asset_id, ref, v, "redacted")
        return len(redacted)

    def flag_for_deletion(self, asset_id: str) -> None:
        self.pending_deletion.add(asset_id)

    def audit_digest(self, asset_id: str) -> list[AuditEntry]:
        entries = self.audit.get(asset_id, [])
        return sorted(entries, key=lambda e: (e.component_ref, e.version, e.seq))

    def verify_audit(self, asset_id: str) -> list[tuple[str, int]]:
        """Return ``(component_ref, version)`` pairs whose stored payload no
        longer matches its most recent anchor."""
        latest_anchor: dict[tuple[str, int], AuditEntry] = {}
        for e in self.audit.get(asset_id, []):
            latest_anchor[(e.component_ref, e.version)] = e
        bad = []
        for (a, ref), history in sorted(self.components.items()):
            if a != asset_id:
                continue
            for v in history:
                anchor = latest_anchor.get((ref, v.version))
                if anchor is None or anchor.digest != payload_digest(v.payload):
                    bad.append((ref, v.version))
        return bad

    def manifest(self, asset_id: str | None = None) -> list[tuple[str, str, int, str, str]]:
        """One record per component: ``(asset, ref, version, digest, cert id)``."""
        rows = []
        for (a, ref), history in sorted(self.components.items()):
            if asset_id is not None and a != asset_id:
                continue
            v = history[-1]
            rows.append((a, ref, v.version, payload_digest(v.payload), cert_id(v.cert)))
        return rows

    def _tamper(self, asset_id: str, component_ref: str, payload: dict[str, Any]) -> None:
        """Test hook: overwrite the latest payload without anchoring."""
        self.latest(asset_id, component_ref).payload = copy.deepcopy(payload)

    def state(self) -> dict:
        return {
            "components": {
                f"{a}/{ref}": [
                    {
                        "version": v.version,
                        "digest": payload_digest(v.payload),
                        "cert": cert_id(v.cert),
                        "personal": dict(v.personal_fields),
                        "tags": list(v.tags),
                    }
                    for v in history
                ]
                for (a, ref), history in self.components.items()
            },
            "audit": {
                a: [[e.component_ref, e.version, e.digest, e.cert, e.note, e.seq] for e in entries]
                for a, entries in self.audit.items()
            },
            "licences": {k: v.to_dict() for k, v in self.licences.items()},
            "pending_deletion": set(self.pending_deletion),
        }
