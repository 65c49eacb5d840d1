"""USSD gateway: the numeric menu the handset interacts with.

Screens are plain text capped at 160 characters. A menu session dies after
90 seconds without input. Input handling is total: any string is answered
with a screen, only the transport itself can raise (a dropped signaling
exchange surfaces as ChannelLost and consumes nothing).

PIN digits leave this module only through the sealed operator channel.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional

from .domain import PIN_RE
from .errors import ChannelLost, UnknownSession
from .mno import MnoSimulator, PinResult, PinStatus
from .netsim import GsmProfile, LatencyModel

MAX_SCREEN_CHARS = 160
INACTIVITY_TIMEOUT_MS = 90_000

# Time a person needs to read the prompt, pick "1" and type four digits.
# Calibrated against observed entry times on feature-phone keypads.
PIN_ENTRY_MODEL = LatencyModel(mean_ms=5700, sd_ms=1500, lo_ms=1000, hi_ms=20_000)


def sample_pin_entry_ms(rng: random.Random) -> float:
    return PIN_ENTRY_MODEL.sample(rng)


class Screen(Enum):
    PROMPT = "PROMPT"
    PIN_ENTRY = "PIN_ENTRY"
    CONFIRMED = "CONFIRMED"
    DENIED = "DENIED"
    ERROR = "ERROR"
    CLOSED = "CLOSED"


DEFAULT_STRINGS = {
    "prompt": "{service}\nLogin request for {msisdn}.\n1. Enter PIN\n2. Deny",
    "prompt_invalid": "Invalid choice.\n1. Enter PIN\n2. Deny",
    "pin_entry": "{service}\nEnter your 4-digit PIN:",
    "pin_invalid": "PIN must be 4 digits.\nEnter your 4-digit PIN:",
    "pin_wrong": "Wrong PIN. {remaining} attempt(s) left.\nEnter your 4-digit PIN:",
    "confirmed": "Approved. Return to {service} to continue.",
    "denied": "Login request denied. No access was granted.",
    "locked": "PIN locked after 3 wrong attempts. Visit an agent to unlock.",
    "closed": "Session ended.",
}


def mask_msisdn(msisdn: str) -> str:
    if len(msisdn) <= 7:
        return msisdn
    return msisdn[:5] + "*" * (len(msisdn) - 7) + msisdn[-2:]


@dataclass
class UssdSession:
    """Live menu session. Owned and mutated by the gateway only."""

    ussd_session_id: str
    msisdn: str
    auth_session_ref: str
    gsm: GsmProfile
    screen: Screen
    text: str
    inactivity_deadline_ms: float
    closed: bool = False


# Callback into the authentication server: (auth_session_ref, kind, payload).
# Kinds: deny, pin_success, pin_wrong, locked, timeout.
OutcomeSink = Callable[[str, str, dict], None]


class UssdGateway:
    def __init__(self, mno: MnoSimulator, clock, rng: random.Random,
                 service_name: str = "Demo Portal",
                 strings: Optional[dict] = None,
                 outcome_sink: Optional[OutcomeSink] = None) -> None:
        self._mno = mno
        self._clock = clock
        self._rng = rng
        self._service = service_name
        self._strings = dict(DEFAULT_STRINGS)
        if strings:
            self._strings.update(strings)
        self._sink = outcome_sink
        self._sessions: dict[str, UssdSession] = {}
        self._by_msisdn: dict[str, str] = {}
        self._lock = threading.RLock()

    def set_outcome_sink(self, sink: OutcomeSink) -> None:
        self._sink = sink

    def _text(self, key: str, **kw) -> str:
        text = self._strings[key].format(service=self._service, **kw)
        assert len(text) <= MAX_SCREEN_CHARS, f"screen {key} exceeds {MAX_SCREEN_CHARS} chars"
        return text

    def open_session(self, msisdn: str, auth_session_ref: str, gsm: GsmProfile) -> UssdSession:
        """Start a menu session at the approval prompt; returns the session.

        A newer push for the same handset replaces any older open session
        (one USSD dialog per phone at a time).
        """
        with self._lock:
            old_id = self._by_msisdn.get(msisdn)
            if old_id is not None:
                old = self._sessions.get(old_id)
                if old is not None and not old.closed:
                    self._close(old, notify_timeout=False)
            sid = f"ussd-{self._rng.getrandbits(64):016x}"
            sess = UssdSession(
                ussd_session_id=sid,
                msisdn=msisdn,
                auth_session_ref=auth_session_ref,
                gsm=gsm,
                screen=Screen.PROMPT,
                text=self._text("prompt", msisdn=mask_msisdn(msisdn)),
                inactivity_deadline_ms=self._clock.now() + INACTIVITY_TIMEOUT_MS,
            )
            self._sessions[sid] = sess
            self._by_msisdn[msisdn] = sid
            return sess

    def get_session(self, ussd_session_id: str) -> UssdSession:
        with self._lock:
            sess = self._sessions.get(ussd_session_id)
        if sess is None:
            raise UnknownSession(ussd_session_id)
        return sess

    def current_for_msisdn(self, msisdn: str) -> Optional[UssdSession]:
        with self._lock:
            sid = self._by_msisdn.get(msisdn)
            return self._sessions.get(sid) if sid else None

    def submit_input(self, ussd_session_id: str, user_input: str) -> UssdSession:
        """Feed one input string to a session and return the next screen.

        Never raises on the content of ``user_input``; unexpected text
        re-renders the current screen with a hint and consumes no PIN
        attempt. The transport drop draw happens before anything else, so a
        lost exchange leaves the session exactly as it was.
        """
        with self._lock:
            sess = self._sessions.get(ussd_session_id)
            if sess is None:
                raise UnknownSession(ussd_session_id)
            if sess.closed:
                return sess
            if self._rng.random() < sess.gsm.drop_prob:
                raise ChannelLost(ussd_session_id)
            sess.inactivity_deadline_ms = self._clock.now() + INACTIVITY_TIMEOUT_MS
            user_input = user_input.strip() if isinstance(user_input, str) else ""
            if sess.screen is Screen.PROMPT:
                self._on_prompt(sess, user_input)
            elif sess.screen is Screen.PIN_ENTRY:
                self._on_pin_entry(sess, user_input)
            return sess

    def _on_prompt(self, sess: UssdSession, user_input: str) -> None:
        if user_input == "1":
            sess.screen = Screen.PIN_ENTRY
            sess.text = self._text("pin_entry")
        elif user_input == "2":
            sess.screen = Screen.DENIED
            sess.text = self._text("denied")
            self._close(sess, notify_timeout=False)
            self._emit(sess, "deny", {})
        else:
            sess.text = self._text("prompt_invalid")

    def _on_pin_entry(self, sess: UssdSession, user_input: str) -> None:
        if not PIN_RE.match(user_input):
            sess.text = self._text("pin_invalid")
            return
        result = self._verify_via_channel(sess.msisdn, user_input)
        if result.status is PinStatus.SUCCESS:
            sess.screen = Screen.CONFIRMED
            sess.text = self._text("confirmed")
            self._close(sess, notify_timeout=False)
            self._emit(sess, "pin_success", {})
        elif result.status is PinStatus.WRONG and result.attempts_remaining > 0:
            sess.text = self._text("pin_wrong", remaining=result.attempts_remaining)
            self._emit(sess, "pin_wrong", {"attempts_remaining": result.attempts_remaining})
        else:
            # Third strike or an already-locked SIM.
            sess.screen = Screen.ERROR
            sess.text = self._text("locked")
            self._close(sess, notify_timeout=False)
            self._emit(sess, "locked", {})

    def _verify_via_channel(self, msisdn: str, pin: str) -> PinResult:
        channel = self._mno.pin_channel
        if channel is None:
            return self._mno.verify_pin(msisdn, pin)
        wire = channel.send({"msisdn": msisdn, "pin": pin})
        return self._mno.receive_pin_submission(wire)

    def _close(self, sess: UssdSession, notify_timeout: bool) -> None:
        sess.closed = True
        if self._by_msisdn.get(sess.msisdn) == sess.ussd_session_id:
            del self._by_msisdn[sess.msisdn]
        if notify_timeout:
            sess.screen = Screen.CLOSED
            sess.text = self._text("closed")
            self._emit(sess, "timeout", {})

    def abandon_session(self, ussd_session_id: str) -> None:
        """Close without any outcome callback (network gave up on the session)."""
        with self._lock:
            sess = self._sessions.get(ussd_session_id)
            if sess is not None and not sess.closed:
                sess.screen = Screen.CLOSED
                sess.text = self._text("closed")
                self._close(sess, notify_timeout=False)

    def tick(self, now_ms: Optional[float] = None) -> list[str]:
        """Sweep sessions past their inactivity deadline; returns closed ids."""
        now = self._clock.now() if now_ms is None else now_ms
        swept = []
        with self._lock:
            for sess in list(self._sessions.values()):
                if not sess.closed and now >= sess.inactivity_deadline_ms:
                    self._close(sess, notify_timeout=True)
                    swept.append(sess.ussd_session_id)
        return swept

    def _emit(self, sess: UssdSession, kind: str, payload: dict) -> None:
        if self._sink is not None:
            self._sink(sess.auth_session_ref, kind, payload)

    def open_session_count(self) -> int:
        with self._lock:
            return sum(1 for s in self._sessions.values() if not s.closed)
