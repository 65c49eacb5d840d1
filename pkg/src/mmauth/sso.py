"""Password-plus-optional-OTP single sign-on, the comparison baseline.

Three portal round trips per login (credential post, token exchange,
resource fetch), one more with OTP enabled. A dropped transmission fails
the whole login; there is no recovery path here, which is the point of the
comparison.

The human/processing base time is calibrated so that end-to-end logins on
the good profile land uniformly in 12-15 seconds; network time on slower
profiles stacks on top of that.
"""

from __future__ import annotations

import math
import random
import threading
from dataclasses import dataclass
from typing import Optional

from .auth import Accept, Reject, RejectReason
from .domain import (METHOD_SSO, FailureReason, OutcomeRecord)
from .errors import UnknownUser
from .hashing import SecretHasher
from .netsim import (GOOD, INTERNET, Delivered, NetworkProfile, TimeCursor,
                     sample_trunc_normal, transmit)
from .tokens import TokenClaims, TokenSigner, parse_token

OTP_LIFETIME_MS = 300_000
WEB_TOKEN_LIFETIME_S = 900
ROUND_TRIPS = 3
REQUEST_BYTES = 900

BASE_TIME_RANGE_S = (12.0, 15.0)
# Expected network share of a good-profile login (6 transmits), subtracted
# from the sampled base so the good-profile total stays inside the range.
_HALF_NORMAL_MEAN = math.sqrt(2.0 / math.pi)
GOOD_NOMINAL_NET_S = ROUND_TRIPS * 2 * (
    GOOD.latency_ms + GOOD.jitter_ms * _HALF_NORMAL_MEAN
    + REQUEST_BYTES * 8.0 / GOOD.bandwidth_kbps) / 1000.0

# Reading the code off a second device and typing six digits.
OTP_ENTRY_MS = (8000.0, 2000.0, 3000.0, 20000.0)


@dataclass(frozen=True)
class WebAccount:
    user_id: str
    email: str
    password_hash: str
    otp_enabled: bool = False


@dataclass
class _PendingOtp:
    code: str
    expires_at_ms: float


class SsoService:
    def __init__(self, hasher: SecretHasher, signer: TokenSigner, clock,
                 rng_net: random.Random, rng_human: random.Random,
                 rng_ids: random.Random) -> None:
        self._hasher = hasher
        self._signer = signer
        self._clock = clock
        self._rng_net = rng_net
        self._rng_human = rng_human
        self._rng_ids = rng_ids
        self._accounts: dict[str, WebAccount] = {}
        self._pending_otp: dict[str, _PendingOtp] = {}
        self._web_sessions: dict[str, TokenClaims] = {}
        self._lock = threading.RLock()

    def register_account(self, email: str, password: str,
                         otp_enabled: bool = False) -> WebAccount:
        with self._lock:
            existing = self._accounts.get(email)
            if existing is not None:
                return existing
            account = WebAccount(user_id=f"w-{self._rng_ids.getrandbits(48):012x}",
                                 email=email,
                                 password_hash=self._hasher.hash(password),
                                 otp_enabled=otp_enabled)
            self._accounts[email] = account
            return account

    def issue_otp(self, email: str) -> str:
        """Mint a fresh six-digit code; replaces any outstanding one."""
        with self._lock:
            if email not in self._accounts:
                raise UnknownUser(email)
            code = f"{self._rng_ids.randrange(10 ** 6):06d}"
            self._pending_otp[email] = _PendingOtp(
                code=code, expires_at_ms=self._clock.now() + OTP_LIFETIME_MS)
            return code

    def _consume_otp(self, email: str, code: str) -> bool:
        with self._lock:
            pending = self._pending_otp.get(email)
            if pending is None:
                return False
            if self._clock.now() >= pending.expires_at_ms:
                del self._pending_otp[email]
                return False
            if code != pending.code:
                return False
            del self._pending_otp[email]  # single use
            return True

    def sso_login(self, email: str, password: str, prof: NetworkProfile,
                  cursor: TimeCursor, otp_code: Optional[str] = None
                  ) -> tuple[OutcomeRecord, Optional[str]]:
        """Run one login journey; returns (outcome, token or None).

        For an OTP-enabled account with ``otp_code`` left as None the journey
        requests and enters the current code itself, standing in for the user
        reading it off their phone. An explicit wrong code fails the login.
        """
        with self._lock:
            account = self._accounts.get(email)
        if account is None:
            raise UnknownUser(email)
        started = cursor.now()
        components: dict[str, float] = {}
        interactions = 3 + (1 if account.otp_enabled else 0)

        def outcome(success: bool, reason: Optional[FailureReason],
                    token: Optional[str]) -> tuple[OutcomeRecord, Optional[str]]:
            finished = cursor.now()
            return OutcomeRecord(
                method=METHOD_SSO, profile=prof.name, gsm=None,
                started_ms=started, finished_ms=finished,
                success=success, failure_reason=reason,
                auth_time_s=(finished - started) / 1000.0,
                interaction_count=interactions,
                components_s=components), token

        base_s = self._rng_human.uniform(*BASE_TIME_RANGE_S) - GOOD_NOMINAL_NET_S
        cursor.advance(base_s * 1000.0)
        components["credential_entry"] = base_s

        net_s = 0.0

        def round_trip() -> bool:
            nonlocal net_s
            for _ in range(2):
                result = transmit(REQUEST_BYTES, INTERNET, prof, self._rng_net)
                if not isinstance(result, Delivered):
                    return False
                cursor.advance(result.delay_ms)
                net_s += result.delay_ms / 1000.0

            return True

        # Leg 1: credential post.
        if not round_trip():
            components["round_trips"] = net_s
            return outcome(False, FailureReason.NETWORK_DROP, None)
        if not self._hasher.verify(password, account.password_hash):
            components["round_trips"] = net_s
            return outcome(False, FailureReason.BAD_CREDENTIALS, None)

        if account.otp_enabled:
            # No explicit code: the journey requests one and types it in,
            # standing in for the user reading the SMS. An explicit code is
            # checked against whatever issue_otp minted earlier.
            code = otp_code if otp_code is not None else self.issue_otp(email)
            entry_ms = sample_trunc_normal(self._rng_human, *OTP_ENTRY_MS)
            cursor.advance(entry_ms)
            components["otp_entry"] = entry_ms / 1000.0
            if not round_trip():  # OTP submission leg
                components["round_trips"] = net_s
                return outcome(False, FailureReason.NETWORK_DROP, None)
            if not self._consume_otp(email, code):
                components["round_trips"] = net_s
                return outcome(False, FailureReason.BAD_CREDENTIALS, None)

        # Leg 2: token exchange.
        if not round_trip():
            components["round_trips"] = net_s
            return outcome(False, FailureReason.NETWORK_DROP, None)
        token = self._issue_web_token(account)
        # Leg 3: first resource fetch with the new token.
        if not round_trip():
            components["round_trips"] = net_s
            return outcome(False, FailureReason.NETWORK_DROP, None)
        components["round_trips"] = net_s
        return outcome(True, None, token)

    def _issue_web_token(self, account: WebAccount) -> str:
        now_s = int(self._clock.now() / 1000)
        claims = TokenClaims(
            sub=account.user_id,
            sid=f"ws-{self._rng_ids.getrandbits(128):032x}",
            iat=now_s,
            exp=now_s + WEB_TOKEN_LIFETIME_S,
            nonce=f"{self._rng_ids.getrandbits(128):032x}",
        )
        with self._lock:
            self._web_sessions[claims.sid] = claims
        return self._signer.sign(claims)

    def validate_web_token(self, token: object) -> Accept | Reject:
        """Same total-check shape as the SIM-bound path, minus the binding."""
        now_s = int(self._clock.now() / 1000)
        claims = parse_token(token)
        if claims is None:
            return Reject(RejectReason.MALFORMED)
        if not self._signer.signature_valid(token):  # type: ignore[arg-type]
            return Reject(RejectReason.BAD_SIGNATURE)
        if claims["exp"] < now_s:
            return Reject(RejectReason.EXPIRED)
        with self._lock:
            issued = self._web_sessions.get(claims["sid"])
        if issued is None or claims["nonce"] != issued.nonce or claims["sub"] != issued.sub:
            return Reject(RejectReason.UNKNOWN_SESSION)
        return Accept(user_id=claims["sub"], session_id=claims["sid"], claims=claims)

    def has_account(self, email: str) -> bool:
        with self._lock:
            return email in self._accounts
