"""Append-only, hash-chained audit log.

Each record hashes its canonical body together with the previous record's
hash; tampering with any exported line breaks the chain from that record on,
and verification reports the earliest broken sequence number.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Optional

GENESIS_HASH = "0" * 64


class AuditEvent(Enum):
    INITIATED = "Initiated"
    PUSH_SENT = "PushSent"
    PIN_OK = "PinOk"
    PIN_FAIL = "PinFail"
    LOCKED = "Locked"
    UNLOCKED = "Unlocked"
    TOKEN_ISSUED = "TokenIssued"
    TOKEN_REJECTED = "TokenRejected"
    DENIED = "Denied"
    EXPIRED = "Expired"
    NETWORK_FAILED = "NetworkFailed"
    RECOVERED = "Recovered"
    SIM_SWAPPED = "SimSwapped"
    ATTACK_OBSERVED = "AttackObserved"


@dataclass(frozen=True)
class AuditRecord:
    seq: int
    event: AuditEvent
    msisdn: Optional[str]
    session_id: Optional[str]
    at_ms: float
    details: dict
    prev_hash: str
    this_hash: str

    def body_dict(self) -> dict:
        return {
            "seq": self.seq,
            "event": self.event.value,
            "msisdn": self.msisdn,
            "session_id": self.session_id,
            "at_ms": round(self.at_ms, 3),
            "details": self.details,
        }

    def to_line(self) -> str:
        d = self.body_dict()
        d["prev_hash"] = self.prev_hash
        d["this_hash"] = self.this_hash
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def _chain_hash(prev_hash: str, body: dict) -> str:
    canonical = json.dumps(body, sort_keys=True, separators=(",", ":")).encode()
    return hashlib.sha256(prev_hash.encode("ascii") + canonical).hexdigest()


class AuditLog:
    """In-memory chained log; thread-safe appends."""

    def __init__(self) -> None:
        self._records: list[AuditRecord] = []
        self._lock = threading.Lock()

    def append(self, event: AuditEvent, at_ms: float, msisdn: Optional[str] = None,
               session_id: Optional[str] = None, details: Optional[dict] = None) -> AuditRecord:
        with self._lock:
            seq = len(self._records)
            prev = self._records[-1].this_hash if self._records else GENESIS_HASH
            body = {
                "seq": seq,
                "event": event.value,
                "msisdn": msisdn,
                "session_id": session_id,
                "at_ms": round(at_ms, 3),
                "details": details or {},
            }
            rec = AuditRecord(seq=seq, event=event, msisdn=msisdn, session_id=session_id,
                              at_ms=round(at_ms, 3), details=details or {},
                              prev_hash=prev, this_hash=_chain_hash(prev, body))
            self._records.append(rec)
            return rec

    def records(self) -> list[AuditRecord]:
        with self._lock:
            return list(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def export_lines(self) -> list[str]:
        return [r.to_line() for r in self.records()]

    def verify_chain(self) -> tuple[bool, Optional[int]]:
        return verify_exported(self.export_lines())


def verify_exported(lines: list[str]) -> tuple[bool, Optional[int]]:
    """Check an exported chain; returns (ok, first_broken_seq).

    A record is broken when it fails to parse, its seq is out of order, its
    prev_hash does not match the predecessor, or its this_hash does not match
    the recomputed body hash.
    """
    prev = GENESIS_HASH
    for i, line in enumerate(lines):
        try:
            d = json.loads(line)
            body = {k: d[k] for k in ("seq", "event", "msisdn", "session_id", "at_ms", "details")}
            claimed_prev = d["prev_hash"]
            claimed_this = d["this_hash"]
        except (ValueError, KeyError, TypeError):
            return False, i
        if body["seq"] != i or claimed_prev != prev:
            return False, i
        if _chain_hash(prev, body) != claimed_this:
            return False, i
        prev = claimed_this
    return True, None
