"""Core domain types and the authentication-session state machine.

Everything here is an immutable value object; services elsewhere hold the
mutable registries. :func:`advance_session` is the single place a session
state may change.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional

from .errors import MalformedMsisdn, TransitionError

_MSISDN_RE = re.compile(r"^\+[0-9]{8,15}$")
PIN_RE = re.compile(r"^[0-9]{4}$")

METHOD_MMA = "mma"
METHOD_SSO = "sso"


def parse_msisdn(raw: str) -> str:
    """Validate a phone number: '+' followed by 8-15 digits."""
    if not isinstance(raw, str) or not _MSISDN_RE.match(raw):
        raise MalformedMsisdn(f"not a valid msisdn: {raw!r}")
    return raw


@dataclass(frozen=True)
class SimCard:
    """State of one SIM as the operator sees it.

    ``failed_attempts`` counts consecutive wrong PINs and lives in [0, 3];
    reaching 3 sets ``locked``. ``swap_epoch`` increments on every SIM swap
    and never decreases.
    """

    msisdn: str
    iccid: str
    pin_hash: str
    failed_attempts: int = 0
    locked: bool = False
    swap_epoch: int = 0

    def __post_init__(self) -> None:
        if not 0 <= self.failed_attempts <= 3:
            raise ValueError("failed_attempts out of range")
        if self.failed_attempts >= 3 and not self.locked:
            raise ValueError("three failures must lock the SIM")
        if self.swap_epoch < 0:
            raise ValueError("swap_epoch cannot be negative")
        if not re.match(r"^[0-9]{19,20}$", self.iccid):
            raise ValueError(f"iccid must be 19-20 digits, got {self.iccid!r}")


@dataclass(frozen=True)
class UserAccount:
    user_id: str
    msisdn: str
    display_name: str
    created_at_ms: float


class SessionState(Enum):
    INITIATED = "INITIATED"
    USSD_PUSHED = "USSD_PUSHED"
    PIN_PENDING = "PIN_PENDING"
    VERIFIED = "VERIFIED"
    TOKEN_ISSUED = "TOKEN_ISSUED"
    ACTIVE = "ACTIVE"
    DENIED = "DENIED"
    LOCKED_OUT = "LOCKED_OUT"
    EXPIRED = "EXPIRED"
    FAILED_NETWORK = "FAILED_NETWORK"


TERMINAL_STATES = frozenset({
    SessionState.ACTIVE,
    SessionState.DENIED,
    SessionState.LOCKED_OUT,
    SessionState.EXPIRED,
    SessionState.FAILED_NETWORK,
})


class SessionEvent(Enum):
    PUSH_DELIVERED = "PushDelivered"
    MENU_SHOWN = "MenuShown"
    PIN_OK = "PinOk"
    PIN_WRONG_FINAL = "PinWrongFinal"
    DENY = "Deny"
    TOKEN_ISSUED = "TokenIssued"
    RESOURCE_GRANTED = "ResourceGranted"
    TIMEOUT = "Timeout"
    CHANNEL_LOST = "ChannelLost"


_PROGRESS: dict[tuple[SessionState, SessionEvent], SessionState] = {
    (SessionState.INITIATED, SessionEvent.PUSH_DELIVERED): SessionState.USSD_PUSHED,
    (SessionState.USSD_PUSHED, SessionEvent.MENU_SHOWN): SessionState.PIN_PENDING,
    (SessionState.PIN_PENDING, SessionEvent.PIN_OK): SessionState.VERIFIED,
    (SessionState.PIN_PENDING, SessionEvent.PIN_WRONG_FINAL): SessionState.LOCKED_OUT,
    (SessionState.PIN_PENDING, SessionEvent.DENY): SessionState.DENIED,
    (SessionState.VERIFIED, SessionEvent.TOKEN_ISSUED): SessionState.TOKEN_ISSUED,
    (SessionState.TOKEN_ISSUED, SessionEvent.RESOURCE_GRANTED): SessionState.ACTIVE,
}


def _build_transitions() -> dict[tuple[SessionState, SessionEvent], SessionState]:
    table = dict(_PROGRESS)
    for state in SessionState:
        if state in TERMINAL_STATES:
            continue
        table[(state, SessionEvent.TIMEOUT)] = SessionState.EXPIRED
        table[(state, SessionEvent.CHANNEL_LOST)] = SessionState.FAILED_NETWORK
    return table


TRANSITIONS = _build_transitions()


@dataclass(frozen=True)
class AuthSession:
    """One in-flight or finished authentication attempt.

    ``bound_swap_epoch`` snapshots the SIM's swap epoch at initiation; token
    validation compares it against the live SIM. ``retry_count`` counts
    recoveries consumed by this session (budget enforced by the server).
    """

    session_id: str
    msisdn: str
    state: SessionState
    nonce: str
    created_at_ms: float
    expires_at_ms: float
    bound_swap_epoch: int
    ussd_session_id: Optional[str] = None
    retry_count: int = 0

    def __post_init__(self) -> None:
        if self.expires_at_ms <= self.created_at_ms:
            raise ValueError("session must expire after creation")
        if self.retry_count < 0:
            raise ValueError("retry_count cannot be negative")

    @property
    def terminal(self) -> bool:
        return self.state in TERMINAL_STATES


def advance_session(session: AuthSession, event: SessionEvent) -> AuthSession:
    """Apply one event; returns the new session or raises TransitionError.

    Pure function: the input is untouched, illegal pairs (including any event
    on a terminal state) raise rather than silently no-op.
    """
    if session.state in TERMINAL_STATES:
        raise TransitionError(f"session {session.session_id} is terminal ({session.state.value})")
    nxt = TRANSITIONS.get((session.state, event))
    if nxt is None:
        raise TransitionError(f"no transition for {session.state.value} on {event.value}")
    return replace(session, state=nxt)


class FailureReason(Enum):
    DENIED = "Denied"
    LOCKOUT = "Lockout"
    NETWORK_DROP = "NetworkDrop"
    TIMEOUT = "Timeout"
    BAD_CREDENTIALS = "BadCredentials"
    OTHER = "Other"


@dataclass(frozen=True)
class OutcomeRecord:
    """Result of one authentication journey, either method.

    ``auth_time_s`` covers initiation to resource grant (or to the failure);
    ``components_s`` breaks it down by step and sums to ``auth_time_s`` for
    completed journeys. ``interaction_count`` is the number of explicit user
    actions the journey required.
    """

    method: str
    profile: str
    gsm: Optional[str]
    started_ms: float
    finished_ms: float
    success: bool
    failure_reason: Optional[FailureReason]
    auth_time_s: float
    interaction_count: int
    retries: int = 0
    incident: bool = False
    components_s: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.method not in (METHOD_MMA, METHOD_SSO):
            raise ValueError(f"unknown method {self.method!r}")
        if self.success and self.failure_reason is not None:
            raise ValueError("successful journey cannot carry a failure reason")
        if not self.success and self.failure_reason is None:
            raise ValueError("failed journey needs a failure reason")
        if self.auth_time_s < 0:
            raise ValueError("auth_time_s cannot be negative")

    def to_json_dict(self) -> dict:
        return {
            "method": self.method,
            "profile": self.profile,
            "gsm": self.gsm,
            "started_ms": round(self.started_ms, 3),
            "finished_ms": round(self.finished_ms, 3),
            "success": self.success,
            "failure_reason": self.failure_reason.value if self.failure_reason else None,
            "auth_time_s": round(self.auth_time_s, 6),
            "interaction_count": self.interaction_count,
            "retries": self.retries,
            "incident": self.incident,
            "components_s": {k: round(v, 6) for k, v in sorted(self.components_s.items())},
        }
