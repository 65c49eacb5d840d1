"""Compact signed session tokens.

Standard three-part web-token layout: base64url(header).base64url(claims).
base64url(HMAC-SHA256 signature), header fixed to {"alg": "HS256", "typ":
"JWT"}. Claims are exactly sub, sid, simb, iat, exp, nonce; ``simb`` binds
the token to a specific physical SIM and swap epoch and is omitted for web
sessions that have no SIM.

Parsing is total: :func:`parse_token` returns None for anything that is not
a well-formed token, it never raises on attacker-controlled input.
"""

from __future__ import annotations

import base64
import hashlib
import hmac
import json
from dataclasses import dataclass
from typing import Optional

HEADER = {"alg": "HS256", "typ": "JWT"}
_CLAIM_KEYS = {"sub", "sid", "simb", "iat", "exp", "nonce"}


def b64url_encode(raw: bytes) -> str:
    return base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii")


def b64url_decode(text: str) -> Optional[bytes]:
    """Decode unpadded base64url; None on any malformation.

    Canonical spellings only: the decode must re-encode to the exact input,
    otherwise two different token strings could alias to the same bytes
    (stray characters are silently dropped by the base64 layer, and the
    final character's unused padding bits are ignored).
    """
    if not isinstance(text, str) or not text:
        return None
    pad = -len(text) % 4
    try:
        raw = base64.urlsafe_b64decode((text + "=" * pad).encode("ascii"))
    except (ValueError, UnicodeEncodeError):
        return None
    if base64.urlsafe_b64encode(raw).rstrip(b"=").decode("ascii") != text:
        return None
    return raw


@dataclass(frozen=True)
class TokenClaims:
    sub: str
    sid: str
    iat: int
    exp: int
    nonce: str
    simb: Optional[str] = None

    def to_dict(self) -> dict:
        d = {"sub": self.sub, "sid": self.sid, "iat": self.iat,
             "exp": self.exp, "nonce": self.nonce}
        if self.simb is not None:
            d["simb"] = self.simb
        return d


class TokenSigner:
    """Signs and checks tokens with one 256-bit HMAC key."""

    def __init__(self, key: bytes) -> None:
        if len(key) != 32:
            raise ValueError("signing key must be exactly 32 bytes")
        self._key = key

    def sign(self, claims: TokenClaims) -> str:
        header_b = b64url_encode(json.dumps(HEADER, separators=(",", ":"), sort_keys=True).encode())
        payload_b = b64url_encode(json.dumps(claims.to_dict(), separators=(",", ":"),
                                             sort_keys=True).encode())
        signing_input = f"{header_b}.{payload_b}".encode("ascii")
        sig = hmac.new(self._key, signing_input, hashlib.sha256).digest()
        return f"{header_b}.{payload_b}.{b64url_encode(sig)}"

    def signature_valid(self, token: str) -> bool:
        parts = token.split(".")
        if len(parts) != 3:
            return False
        sig = b64url_decode(parts[2])
        if sig is None:
            return False
        try:
            signing_input = f"{parts[0]}.{parts[1]}".encode("ascii")
        except UnicodeEncodeError:
            return False
        want = hmac.new(self._key, signing_input, hashlib.sha256).digest()
        return hmac.compare_digest(sig, want)


def parse_token(token: object) -> Optional[dict]:
    """Decode header+claims without verifying the signature.

    Returns the claims dict only when the token has three b64url parts, the
    header is exactly the expected one, the payload is a JSON object with
    exactly the expected claim names (simb optional) and sane value types.
    """
    if not isinstance(token, str):
        return None
    parts = token.split(".")
    if len(parts) != 3:
        return None
    header_raw = b64url_decode(parts[0])
    payload_raw = b64url_decode(parts[1])
    if header_raw is None or payload_raw is None or b64url_decode(parts[2]) is None:
        return None
    try:
        header = json.loads(header_raw)
        payload = json.loads(payload_raw)
    except (ValueError, UnicodeDecodeError):
        return None
    if header != HEADER or not isinstance(payload, dict):
        return None
    keys = set(payload)
    if not keys <= _CLAIM_KEYS or not {"sub", "sid", "iat", "exp", "nonce"} <= keys:
        return None
    if not all(isinstance(payload[k], str) for k in ("sub", "sid", "nonce")):
        return None
    if "simb" in payload and not isinstance(payload["simb"], str):
        return None
    if not all(isinstance(payload[k], int) and not isinstance(payload[k], bool)
               for k in ("iat", "exp")):
        return None
    return payload


def sim_binding(iccid: str, swap_epoch: int, binding_salt: bytes) -> str:
    """Hash tying a token to one physical SIM in one swap epoch.

    Recomputed at validation time from the live SIM record; a swap changes
    both the iccid and the epoch, so stale tokens stop matching.
    """
    material = iccid.encode() + b"|" + str(swap_epoch).encode() + b"|" + binding_salt
    return hashlib.sha256(material).hexdigest()
