"""Authentication server.

Orchestrates the approval flow: initiation (rate-limited), USSD push,
PIN verification outcomes arriving from the gateway, token issuance bound to
the SIM's swap epoch, total token validation, and mid-session recovery with
a bounded retry budget. Every state-changing step lands in the audit chain.
"""

from __future__ import annotations

import random
import threading
from collections import deque
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional

from .audit import AuditEvent, AuditLog
from .domain import (AuthSession, SessionEvent, SessionState, UserAccount,
                     advance_session, parse_msisdn)
from .errors import AlreadyIssued, RateLimited, StaleSession, UnknownSession, UnknownUser
from .mno import MnoSimulator, UssdDelivery
from .netsim import (GsmProfile, LatencyModel, RECONNECT_CAP_S, RECONNECT_MEAN_S)
from .tokens import TokenClaims, TokenSigner, parse_token, sim_binding
from .ussd import UssdGateway

PENDING_LIFETIME_MS = 300_000
TOKEN_LIFETIME_S = 900
RATE_LIMIT_MAX = 5
RATE_LIMIT_WINDOW_MS = 60_000

# One leg tolerates two automatic retries; the third consecutive drop on the
# same leg abandons the session. Independently, a session may consume at most
# three recoveries overall.
MAX_LEG_RETRIES = 2
MAX_SESSION_RECOVERIES = 3

TOKEN_ISSUE_MODEL = LatencyModel(mean_ms=300, sd_ms=50, lo_ms=20)


def sample_token_latency_ms(rng: random.Random) -> float:
    return TOKEN_ISSUE_MODEL.sample(rng)


class RejectReason(Enum):
    MALFORMED = "Malformed"
    BAD_SIGNATURE = "BadSignature"
    EXPIRED = "Expired"
    UNKNOWN_SESSION = "UnknownSession"
    SIM_SWAP_DETECTED = "SimSwapDetected"
    REVOKED = "Revoked"


@dataclass(frozen=True)
class Accept:
    user_id: str
    session_id: str
    claims: dict


@dataclass(frozen=True)
class Reject:
    reason: RejectReason


class AuthService:
    def __init__(self, mno: MnoSimulator, gateway: UssdGateway, clock,
                 rng: random.Random, signer: TokenSigner, audit: AuditLog,
                 binding_salt: bytes,
                 pending_lifetime_ms: float = PENDING_LIFETIME_MS,
                 token_lifetime_s: int = TOKEN_LIFETIME_S) -> None:
        self._mno = mno
        self._gateway = gateway
        self._clock = clock
        self._rng = rng
        self._signer = signer
        self._audit = audit
        self._binding_salt = binding_salt
        self._pending_lifetime_ms = pending_lifetime_ms
        self._token_lifetime_s = token_lifetime_s
        self._users: dict[str, UserAccount] = {}
        self._users_by_id: dict[str, UserAccount] = {}
        self._sessions: dict[str, AuthSession] = {}
        self._session_gsm: dict[str, GsmProfile] = {}
        self._session_iccid: dict[str, str] = {}
        self._last_push: dict[str, UssdDelivery] = {}
        self._tokens: dict[str, str] = {}
        self._token_claims: dict[str, TokenClaims] = {}
        self._delivered: set[str] = set()
        self._revoked: set[str] = set()
        self._initiations: dict[str, deque] = {}
        self._lock = threading.RLock()
        gateway.set_outcome_sink(self._on_ussd_event)

    # -- enrollment -------------------------------------------------------

    def register_user(self, msisdn: str, display_name: str) -> UserAccount:
        msisdn = parse_msisdn(msisdn)
        self._mno.get_sim(msisdn)  # enrollment requires an active SIM
        with self._lock:
            if msisdn in self._users:
                return self._users[msisdn]
            user = UserAccount(user_id=f"u-{self._rng.getrandbits(48):012x}",
                               msisdn=msisdn, display_name=display_name,
                               created_at_ms=self._clock.now())
            self._users[msisdn] = user
            self._users_by_id[user.user_id] = user
            return user

    def get_user(self, msisdn: str) -> Optional[UserAccount]:
        with self._lock:
            return self._users.get(msisdn)

    # -- initiation -------------------------------------------------------

    def initiate_auth(self, msisdn: str, gsm: GsmProfile) -> AuthSession:
        """Start an authentication attempt and push the approval menu.

        Raises UnknownUser for unenrolled numbers and RateLimited past five
        initiations per number inside a sliding sixty-second window. The
        push's transport fate is recorded; an undelivered push leaves the
        session in INITIATED for the caller to recover or abandon.
        """
        msisdn = parse_msisdn(msisdn)
        now = self._clock.now()
        with self._lock:
            user = self._users.get(msisdn)
            if user is None:
                raise UnknownUser(msisdn)
            window = self._initiations.setdefault(msisdn, deque())
            while window and window[0] <= now - RATE_LIMIT_WINDOW_MS:
                window.popleft()
            if len(window) >= RATE_LIMIT_MAX:
                raise RateLimited(msisdn)
            window.append(now)
            sim = self._mno.get_sim(msisdn)
            session = AuthSession(
                session_id=f"s-{self._rng.getrandbits(128):032x}",
                msisdn=msisdn,
                state=SessionState.INITIATED,
                nonce=f"{self._rng.getrandbits(128):032x}",
                created_at_ms=now,
                expires_at_ms=now + self._pending_lifetime_ms,
                bound_swap_epoch=sim.swap_epoch,
            )
            self._sessions[session.session_id] = session
            self._session_gsm[session.session_id] = gsm
            self._session_iccid[session.session_id] = sim.iccid
        self._audit.append(AuditEvent.INITIATED, now, msisdn=msisdn,
                           session_id=session.session_id)
        self._attempt_push(session.session_id)
        return self.get_session(session.session_id)

    def _attempt_push(self, session_id: str) -> UssdDelivery:
        with self._lock:
            sess = self._sessions[session_id]
            gsm = self._session_gsm[session_id]
        delivery = self._mno.push_ussd(sess.msisdn, session_id, gsm)
        with self._lock:
            sess = self._sessions[session_id]
            if delivery.delivered and sess.state is SessionState.INITIATED:
                sess = advance_session(sess, SessionEvent.PUSH_DELIVERED)
                sess = advance_session(sess, SessionEvent.MENU_SHOWN)
                sess = replace(sess, ussd_session_id=delivery.ussd_session_id)
                self._sessions[session_id] = sess
            self._last_push[session_id] = delivery
        return delivery

    def retry_push(self, session_id: str) -> UssdDelivery:
        """Re-attempt an undelivered approval push for a live session."""
        sess = self.get_session(session_id)
        if sess.terminal:
            raise StaleSession(session_id)
        if sess.state is not SessionState.INITIATED:
            return self.last_push_delivery(session_id)  # already on the handset
        return self._attempt_push(session_id)

    def last_push_delivery(self, session_id: str) -> UssdDelivery:
        with self._lock:
            delivery = self._last_push.get(session_id)
        if delivery is None:
            raise UnknownSession(session_id)
        return delivery

    def get_session(self, session_id: str) -> AuthSession:
        with self._lock:
            sess = self._sessions.get(session_id)
        if sess is None:
            raise UnknownSession(session_id)
        return sess

    # -- USSD outcomes ----------------------------------------------------

    def _on_ussd_event(self, session_id: str, kind: str, payload: dict) -> None:
        # Idempotent on purpose: a timeout sweep may fire after the session
        # already failed over the network path.
        with self._lock:
            sess = self._sessions.get(session_id)
            if sess is None or sess.terminal:
                return
            if kind == "pin_success":
                self._sessions[session_id] = advance_session(sess, SessionEvent.PIN_OK)
            elif kind == "deny":
                self._sessions[session_id] = advance_session(sess, SessionEvent.DENY)
                self._audit.append(AuditEvent.DENIED, self._clock.now(),
                                   msisdn=sess.msisdn, session_id=session_id)
            elif kind == "locked":
                self._sessions[session_id] = advance_session(sess, SessionEvent.PIN_WRONG_FINAL)
            elif kind == "timeout":
                self._sessions[session_id] = advance_session(sess, SessionEvent.TIMEOUT)
                self._audit.append(AuditEvent.EXPIRED, self._clock.now(),
                                   msisdn=sess.msisdn, session_id=session_id)
            elif kind == "pin_wrong":
                pass  # stays PIN_PENDING; operator already audited the failure
            else:
                raise ValueError(f"unknown ussd outcome {kind!r}")

    def complete_auth(self, session_id: str, outcome: Optional[str] = None) -> Optional[str]:
        """Finish an attempt after its USSD outcome; returns the token or None.

        Normally the gateway callback has already moved the session and this
        issues the token from VERIFIED. Tests may drive the branch directly
        via ``outcome`` in {"success", "deny", "locked", "timeout"}. The
        failure branches settle the session and return None.
        """
        with self._lock:
            sess = self._sessions.get(session_id)
            if sess is None:
                raise UnknownSession(session_id)
            if sess.terminal:
                raise StaleSession(session_id)
            if outcome is not None:
                if outcome == "success":
                    sess = advance_session(sess, SessionEvent.PIN_OK)
                    self._sessions[session_id] = sess
                elif outcome == "deny":
                    self._sessions[session_id] = advance_session(sess, SessionEvent.DENY)
                    self._audit.append(AuditEvent.DENIED, self._clock.now(),
                                       msisdn=sess.msisdn, session_id=session_id)
                    return None
                elif outcome == "locked":
                    self._sessions[session_id] = advance_session(sess, SessionEvent.PIN_WRONG_FINAL)
                    return None
                elif outcome == "timeout":
                    self._sessions[session_id] = advance_session(sess, SessionEvent.TIMEOUT)
                    self._audit.append(AuditEvent.EXPIRED, self._clock.now(),
                                       msisdn=sess.msisdn, session_id=session_id)
                    return None
                else:
                    raise ValueError(f"unknown outcome {outcome!r}")
        return self.issue_token(session_id)

    # -- tokens -----------------------------------------------------------

    def issue_token(self, session_id: str) -> str:
        """Mint the session's single token; binding snapshots the SIM epoch.

        The binding hash uses the ICCID and swap epoch captured at
        initiation, so a swap at any later point makes validation fail.
        """
        now_s = int(self._clock.now() / 1000)
        with self._lock:
            sess = self._sessions.get(session_id)
            if sess is None:
                raise UnknownSession(session_id)
            if session_id in self._tokens:
                raise AlreadyIssued(session_id)
            if sess.state is not SessionState.VERIFIED:
                raise StaleSession(f"{session_id} is {sess.state.value}, not VERIFIED")
            user = self._users[sess.msisdn]
            claims = TokenClaims(
                sub=user.user_id,
                sid=session_id,
                simb=sim_binding(self._session_iccid[session_id],
                                 sess.bound_swap_epoch, self._binding_salt),
                iat=now_s,
                exp=now_s + self._token_lifetime_s,
                nonce=sess.nonce,
            )
            token = self._signer.sign(claims)
            self._tokens[session_id] = token
            self._token_claims[session_id] = claims
            self._sessions[session_id] = advance_session(sess, SessionEvent.TOKEN_ISSUED)
        self._audit.append(AuditEvent.TOKEN_ISSUED, self._clock.now(),
                           msisdn=sess.msisdn, session_id=session_id,
                           details={"exp": claims.exp})
        return token

    def validate_token(self, token: object, now_ms: Optional[float] = None) -> Accept | Reject:
        """Total, read-only token check; never raises on attacker input.

        Check order: shape, signature, expiry, session knowledge (sid, nonce
        and subject must match what was issued), SIM binding against the live
        SIM, then revocation/session liveness.
        """
        now_s = int((self._clock.now() if now_ms is None else now_ms) / 1000)
        claims = parse_token(token)
        if claims is None:
            return Reject(RejectReason.MALFORMED)
        if not self._signer.signature_valid(token):  # type: ignore[arg-type]
            return Reject(RejectReason.BAD_SIGNATURE)
        if claims["exp"] < now_s:
            return Reject(RejectReason.EXPIRED)
        with self._lock:
            sid = claims["sid"]
            sess = self._sessions.get(sid)
            issued = self._token_claims.get(sid)
            if sess is None or issued is None:
                return Reject(RejectReason.UNKNOWN_SESSION)
            if claims["nonce"] != issued.nonce or claims["sub"] != issued.sub:
                return Reject(RejectReason.UNKNOWN_SESSION)
            sim = self._mno.get_sim(sess.msisdn)
            live_binding = sim_binding(sim.iccid, sim.swap_epoch, self._binding_salt)
            if claims.get("simb") != live_binding:
                return Reject(RejectReason.SIM_SWAP_DETECTED)
            if sid in self._revoked or sess.state not in (SessionState.TOKEN_ISSUED,
                                                          SessionState.ACTIVE):
                return Reject(RejectReason.REVOKED)
            return Accept(user_id=claims["sub"], session_id=sid, claims=claims)

    def grant_resource(self, token: object) -> Accept | Reject:
        """Validate and, on first use, move the session to ACTIVE."""
        result = self.validate_token(token)
        if isinstance(result, Reject):
            self._audit.append(AuditEvent.TOKEN_REJECTED, self._clock.now(),
                               details={"reason": result.reason.value})
            return result
        with self._lock:
            sess = self._sessions.get(result.session_id)
            if sess is not None and sess.state is SessionState.TOKEN_ISSUED:
                self._sessions[result.session_id] = advance_session(
                    sess, SessionEvent.RESOURCE_GRANTED)
        return result

    def revoke_session(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise UnknownSession(session_id)
            self._revoked.add(session_id)

    def pop_token_for_delivery(self, session_id: str) -> Optional[str]:
        """Token for a session, handed out at most once."""
        with self._lock:
            if session_id in self._delivered:
                return None
            token = self._tokens.get(session_id)
            if token is not None:
                self._delivered.add(session_id)
            return token

    # -- recovery ---------------------------------------------------------

    def recover_session(self, session_id: str, reconnect_delay_s: float) -> bool:
        """Try to resume after a mid-session drop.

        Succeeds iff the link came back under the hard cap and the session
        still has recovery budget; state is preserved on success. Failure
        settles the session as FAILED_NETWORK.
        """
        with self._lock:
            sess = self._sessions.get(session_id)
            if sess is None:
                raise UnknownSession(session_id)
            if sess.terminal:
                raise StaleSession(session_id)
            if sess.retry_count >= MAX_SESSION_RECOVERIES or reconnect_delay_s >= RECONNECT_CAP_S:
                self._fail_network_locked(sess)
                return False
            self._sessions[session_id] = replace(sess, retry_count=sess.retry_count + 1)
        self._audit.append(AuditEvent.RECOVERED, self._clock.now(), msisdn=sess.msisdn,
                           session_id=session_id,
                           details={"reconnect_s": round(reconnect_delay_s, 3)})
        return True

    def fail_network(self, session_id: str) -> None:
        """Give up on a session's connectivity (per-leg retry cap exhausted)."""
        with self._lock:
            sess = self._sessions.get(session_id)
            if sess is None:
                raise UnknownSession(session_id)
            if sess.terminal:
                return
            self._fail_network_locked(sess)

    def _fail_network_locked(self, sess: AuthSession) -> None:
        self._sessions[sess.session_id] = advance_session(sess, SessionEvent.CHANNEL_LOST)
        if sess.ussd_session_id:
            self._gateway.abandon_session(sess.ussd_session_id)
        self._audit.append(AuditEvent.NETWORK_FAILED, self._clock.now(),
                           msisdn=sess.msisdn, session_id=sess.session_id,
                           details={"retry_count": sess.retry_count})

    def sample_reconnect_delay_s(self, rng: random.Random) -> float:
        """Reconnect wait: exponential, mean 1.8 s, capped at the hard limit."""
        return min(rng.expovariate(1.0 / RECONNECT_MEAN_S), RECONNECT_CAP_S)

    # -- housekeeping -----------------------------------------------------

    def expire_sessions(self, now_ms: Optional[float] = None) -> list[str]:
        """Time out pending sessions past their lifetime; returns expired ids."""
        now = self._clock.now() if now_ms is None else now_ms
        expired = []
        with self._lock:
            for sid, sess in list(self._sessions.items()):
                if not sess.terminal and now >= sess.expires_at_ms:
                    self._sessions[sid] = advance_session(sess, SessionEvent.TIMEOUT)
                    if sess.ussd_session_id:
                        self._gateway.abandon_session(sess.ussd_session_id)
                    self._audit.append(AuditEvent.EXPIRED, now, msisdn=sess.msisdn,
                                       session_id=sid)
                    expired.append(sid)
        return expired

    def verify_audit_chain(self) -> tuple[bool, Optional[int]]:
        return self._audit.verify_chain()

    def session_count(self) -> int:
        with self._lock:
            return len(self._sessions)

    def all_session_ids(self) -> set[str]:
        with self._lock:
            return set(self._sessions)

    def sessions_in_state(self, state: SessionState) -> int:
        with self._lock:
            return sum(1 for s in self._sessions.values() if s.state is state)
