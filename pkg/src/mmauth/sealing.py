"""Authenticated sealing for payloads that cross component boundaries.

AES-256-GCM over the canonical JSON encoding. A channel can be built with
sealing disabled, which sends bare JSON; that switch exists so the
interception tests can demonstrate the difference, production-shaped code
paths always seal.

Wiretaps see exactly the bytes on the wire, before the receiver opens them.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Callable, Optional

from cryptography.exceptions import InvalidTag
from cryptography.hazmat.primitives.ciphers.aead import AESGCM

from .errors import SealOpenError

_NONCE_LEN = 12


def derive_key(master: bytes, name: str) -> bytes:
    """Per-channel 256-bit key from a master secret and the channel name."""
    return hashlib.sha256(master + b"|then|" + name.encode()).digest()


class SealedChannel:
    """One directed in-process channel with optional AEAD sealing."""

    def __init__(self, name: str, key: bytes, enabled: bool = True) -> None:
        if len(key) != 32:
            raise ValueError("channel key must be 32 bytes")
        self.name = name
        self.enabled = enabled
        self._aead = AESGCM(key)
        self._taps: list[Callable[[bytes], None]] = []

    def add_tap(self, tap: Callable[[bytes], None]) -> None:
        self._taps.append(tap)

    def send(self, payload: dict) -> bytes:
        plain = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode()
        if self.enabled:
            nonce = os.urandom(_NONCE_LEN)
            wire = nonce + self._aead.encrypt(nonce, plain, self.name.encode())
        else:
            wire = plain
        for tap in self._taps:
            tap(wire)
        return wire

    def receive(self, wire: bytes) -> dict:
        if self.enabled:
            if len(wire) <= _NONCE_LEN:
                raise SealOpenError("wire payload too short")
            nonce, ct = wire[:_NONCE_LEN], wire[_NONCE_LEN:]
            try:
                plain = self._aead.decrypt(nonce, ct, self.name.encode())
            except InvalidTag as exc:
                raise SealOpenError(f"sealed payload failed authentication on {self.name}") from exc
        else:
            plain = wire
        try:
            payload = json.loads(plain)
        except (ValueError, UnicodeDecodeError) as exc:
            raise SealOpenError(f"payload on {self.name} is not valid JSON") from exc
        if not isinstance(payload, dict):
            raise SealOpenError(f"payload on {self.name} is not an object")
        return payload
