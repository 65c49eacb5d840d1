"""Salted PIN and password hashing on scrypt.

Stored form: ``scrypt$<n>$<r>$<p>$<salt_hex>$<key_hex>``. Parameters travel
with the hash, so verification works regardless of which preset minted it.
"""

from __future__ import annotations

import hashlib
import hmac
import os
from dataclasses import dataclass


@dataclass(frozen=True)
class SecretHasher:
    n: int = 2 ** 14
    r: int = 8
    p: int = 1
    dklen: int = 32

    @classmethod
    def interactive(cls) -> "SecretHasher":
        """Cost suitable for live logins (tens of milliseconds per call)."""
        return cls(n=2 ** 14)

    @classmethod
    def fast(cls) -> "SecretHasher":
        # Deliberately cheap: simulation runs hash tens of thousands of
        # secrets and only need the code path, not the work factor.
        return cls(n=16)

    def hash(self, secret: str) -> str:
        salt = os.urandom(16)
        key = hashlib.scrypt(secret.encode(), salt=salt, n=self.n, r=self.r,
                             p=self.p, dklen=self.dklen)
        return f"scrypt${self.n}${self.r}${self.p}${salt.hex()}${key.hex()}"

    @staticmethod
    def verify(secret: str, stored: str) -> bool:
        try:
            scheme, n, r, p, salt_hex, key_hex = stored.split("$")
            if scheme != "scrypt":
                return False
            salt = bytes.fromhex(salt_hex)
            want = bytes.fromhex(key_hex)
            got = hashlib.scrypt(secret.encode(), salt=salt, n=int(n), r=int(r),
                                 p=int(p), dklen=len(want))
        except (ValueError, TypeError):
            return False
        return hmac.compare_digest(got, want)
