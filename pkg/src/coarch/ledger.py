"""Hash-chained provenance ledger.

Every provenance record is wrapped in a ledger entry whose digest covers
the record's canonical JSON bytes plus the previous entry's digest.  The
chain makes in-place edits detectable: changing any persisted byte either
breaks a digest, breaks the chain link, or breaks the serialization.

Appends are strictly sequential.  Truncating the tail of the file yields a
shorter but internally consistent ledger; the chain guards content, not
length, so callers that care about loss compare against a known head.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Any, Iterable, Mapping, Sequence

from .errors import CorruptLedger, SchemaViolation, SequenceViolation
from .model import ProvenanceRecord, canonical_json

GENESIS_DIGEST = "0" * 64


def entry_digest(record: ProvenanceRecord, prev_digest: str) -> str:
    """Digest of one entry: sha256 over the record's canonical JSON and
    the previous digest, so each entry seals everything before it."""
    payload = canonical_json(record.to_dict()) + "\n" + prev_digest
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class LedgerEntry:
    record: ProvenanceRecord
    prev_digest: str
    digest: str

    def to_dict(self) -> dict[str, Any]:
        data = self.record.to_dict()
        data["prev_digest"] = self.prev_digest
        data["digest"] = self.digest
        return data

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "LedgerEntry":
        prev_digest = data.get("prev_digest")
        digest = data.get("digest")
        if not isinstance(prev_digest, str) or not isinstance(digest, str):
            raise SchemaViolation("LedgerEntry: prev_digest and digest must be strings")
        record_data = {
            k: v for k, v in data.items() if k not in ("prev_digest", "digest")
        }
        return cls(
            record=ProvenanceRecord.from_dict(record_data),
            prev_digest=prev_digest,
            digest=digest,
        )


def append_provenance(
    entries: Sequence[LedgerEntry], record: ProvenanceRecord
) -> tuple[LedgerEntry, ...]:
    """Extend the chain with one record; its seq must be exactly last+1."""
    expected = entries[-1].record.seq + 1 if entries else 1
    if record.seq != expected:
        raise SequenceViolation(
            f"ledger append expected seq {expected}, got {record.seq}",
            detail={"expected": expected, "got": record.seq},
        )
    prev = entries[-1].digest if entries else GENESIS_DIGEST
    entry = LedgerEntry(record=record, prev_digest=prev, digest=entry_digest(record, prev))
    return (*entries, entry)


def verify_ledger(entries: Iterable[LedgerEntry]) -> None:
    """Walk the chain from genesis; raise CorruptLedger at the first break."""
    prev = GENESIS_DIGEST
    position = 0
    for entry in entries:
        position += 1
        seq = entry.record.seq
        if seq != position:
            raise CorruptLedger(position, f"expected seq {position}, found {seq}")
        if entry.prev_digest != prev:
            raise CorruptLedger(position, "chain link does not match previous digest")
        if entry.digest != entry_digest(entry.record, entry.prev_digest):
            raise CorruptLedger(position, "entry digest does not match its content")
        prev = entry.digest


def serialize_ledger(entries: Iterable[LedgerEntry]) -> str:
    return "".join(canonical_json(entry.to_dict()) + "\n" for entry in entries)


def parse_ledger(data: bytes | str) -> tuple[LedgerEntry, ...]:
    """Parse serialized entries and verify the whole chain.

    Any damage surfaces as CorruptLedger: bytes that no longer decode,
    lines that no longer parse, fields that no longer validate, and
    digests that no longer match.
    """
    if isinstance(data, bytes):
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError:
            raise CorruptLedger(0, "not valid utf-8") from None
    else:
        text = data
    entries: list[LedgerEntry] = []
    for position, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            raise CorruptLedger(position, "empty line")
        try:
            payload = json.loads(line)
        except json.JSONDecodeError:
            raise CorruptLedger(position, "line is not valid JSON") from None
        if not isinstance(payload, dict):
            raise CorruptLedger(position, "line is not a JSON object")
        try:
            entries.append(LedgerEntry.from_dict(payload))
        except (SchemaViolation, ValueError) as exc:
            raise CorruptLedger(position, f"malformed entry: {exc}") from None
    verify_ledger(entries)
    return tuple(entries)
