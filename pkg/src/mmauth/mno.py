"""Simulated mobile network operator.

Owns the SIM registry, delivers USSD pushes over the signaling channel, and
verifies PINs with a strict three-strike lockout. PINs are stored only as
salted hashes; the PIN submission leg from the gateway arrives through a
sealed channel.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, replace
from enum import Enum
from typing import TYPE_CHECKING, Optional

from .audit import AuditEvent, AuditLog
from .domain import PIN_RE, SimCard, parse_msisdn
from .errors import DuplicateMsisdn, MalformedPin, NotLocked, UnknownMsisdn
from .hashing import SecretHasher
from .netsim import GsmProfile, sample_trunc_normal
from .sealing import SealedChannel

if TYPE_CHECKING:
    from .ussd import UssdGateway

MAX_PIN_ATTEMPTS = 3

# Push latency runs longer than a plain signaling exchange: the network has
# to page the handset first. Factor over the profile's mean latency.
PUSH_LATENCY_FACTOR = 1.5
PUSH_LATENCY_FLOOR_MS = 200.0
VERIFY_LATENCY_FLOOR_MS = 100.0


class PinStatus(Enum):
    SUCCESS = "Success"
    WRONG = "Wrong"
    LOCKED = "Locked"


@dataclass(frozen=True)
class PinResult:
    status: PinStatus
    attempts_remaining: Optional[int] = None

    def __post_init__(self) -> None:
        if self.status is PinStatus.WRONG and self.attempts_remaining not in (2, 1, 0):
            raise ValueError("Wrong carries attempts_remaining in {2,1,0}")
        if self.status is not PinStatus.WRONG and self.attempts_remaining is not None:
            raise ValueError("only Wrong carries attempts_remaining")


@dataclass(frozen=True)
class UssdDelivery:
    delivered: bool
    ussd_session_id: Optional[str]
    delay_ms: float


def sample_push_latency_ms(gsm: GsmProfile, rng: random.Random) -> float:
    return sample_trunc_normal(rng, gsm.latency_ms_mean * PUSH_LATENCY_FACTOR,
                               gsm.latency_ms_jitter, lo=PUSH_LATENCY_FLOOR_MS)


def sample_verify_latency_ms(gsm: GsmProfile, rng: random.Random) -> float:
    return sample_trunc_normal(rng, gsm.latency_ms_mean, gsm.latency_ms_jitter / 2,
                               lo=VERIFY_LATENCY_FLOOR_MS)


class MnoSimulator:
    """Operator-side registry and signaling behavior.

    ``clock`` supplies timestamps (any object with ``now() -> ms``);
    ``rng_ids`` mints ICCIDs, ``rng_gsm`` drives transport draws. The USSD
    gateway is attached after construction because each references the other.
    """

    def __init__(self, hasher: SecretHasher, clock, rng_ids: random.Random,
                 rng_gsm: random.Random, audit: Optional[AuditLog] = None,
                 pin_channel: Optional[SealedChannel] = None) -> None:
        self._hasher = hasher
        self._clock = clock
        self._rng_ids = rng_ids
        self._rng_gsm = rng_gsm
        self._audit = audit
        self.pin_channel = pin_channel
        self._gateway: Optional["UssdGateway"] = None
        self._sims: dict[str, SimCard] = {}
        self._lock = threading.RLock()

    def attach_gateway(self, gateway: "UssdGateway") -> None:
        self._gateway = gateway

    def _log(self, event: AuditEvent, msisdn: Optional[str] = None,
             session_id: Optional[str] = None, **details) -> None:
        if self._audit is not None:
            self._audit.append(event, self._clock.now(), msisdn=msisdn,
                               session_id=session_id, details=details or {})

    def register_sim(self, msisdn: str, pin: str) -> SimCard:
        msisdn = parse_msisdn(msisdn)
        if not PIN_RE.match(pin or ""):
            raise MalformedPin("pin must be exactly four digits")
        with self._lock:
            if msisdn in self._sims:
                raise DuplicateMsisdn(msisdn)
            sim = SimCard(msisdn=msisdn, iccid=self._mint_iccid(),
                          pin_hash=self._hasher.hash(pin))
            self._sims[msisdn] = sim
            return sim

    def _mint_iccid(self) -> str:
        return "89" + "".join(str(self._rng_ids.randrange(10)) for _ in range(18))

    def get_sim(self, msisdn: str) -> SimCard:
        with self._lock:
            sim = self._sims.get(msisdn)
        if sim is None:
            raise UnknownMsisdn(msisdn)
        return sim

    def has_sim(self, msisdn: str) -> bool:
        with self._lock:
            return msisdn in self._sims

    def push_ussd(self, msisdn: str, session_ref: str, gsm: GsmProfile) -> UssdDelivery:
        """Attempt to deliver the approval menu to the handset.

        One transport draw decides delivery; on success the gateway opens a
        menu session and the returned delay covers paging plus rendering.
        A drop costs no time here, the caller models the recovery wait.
        """
        self.get_sim(msisdn)
        if self._rng_gsm.random() < gsm.drop_prob:
            return UssdDelivery(delivered=False, ussd_session_id=None, delay_ms=0.0)
        delay = sample_push_latency_ms(gsm, self._rng_gsm)
        ussd_session_id = None
        if self._gateway is not None:
            ussd_session_id = self._gateway.open_session(msisdn, session_ref, gsm).ussd_session_id
        self._log(AuditEvent.PUSH_SENT, msisdn=msisdn, session_id=session_ref,
                  delay_ms=round(delay, 3))
        return UssdDelivery(delivered=True, ussd_session_id=ussd_session_id, delay_ms=delay)

    def verify_pin(self, msisdn: str, pin: str) -> PinResult:
        """Check a PIN against the stored hash, enforcing the three-strike lock.

        A locked SIM answers Locked without evaluating the candidate. The
        third consecutive wrong answer locks and reports zero attempts left;
        a correct answer resets the counter.
        """
        with self._lock:
            sim = self._sims.get(msisdn)
            if sim is None:
                raise UnknownMsisdn(msisdn)
            if sim.locked:
                self._log(AuditEvent.PIN_FAIL, msisdn=msisdn, reason="locked")
                return PinResult(PinStatus.LOCKED)
            if self._hasher.verify(pin, sim.pin_hash):
                self._sims[msisdn] = replace(sim, failed_attempts=0)
                self._log(AuditEvent.PIN_OK, msisdn=msisdn)
                return PinResult(PinStatus.SUCCESS)
            failed = sim.failed_attempts + 1
            locked = failed >= MAX_PIN_ATTEMPTS
            self._sims[msisdn] = replace(sim, failed_attempts=failed, locked=locked)
            remaining = MAX_PIN_ATTEMPTS - failed
            self._log(AuditEvent.PIN_FAIL, msisdn=msisdn, attempts_remaining=remaining)
            if locked:
                self._log(AuditEvent.LOCKED, msisdn=msisdn)
            return PinResult(PinStatus.WRONG, attempts_remaining=remaining)

    def receive_pin_submission(self, wire: bytes) -> PinResult:
        """Entry point for the sealed gateway-to-operator PIN leg."""
        if self.pin_channel is None:
            raise RuntimeError("no pin channel attached")
        payload = self.pin_channel.receive(wire)
        return self.verify_pin(str(payload.get("msisdn")), str(payload.get("pin")))

    def sim_swap(self, msisdn: str) -> SimCard:
        """Replace the physical SIM: new ICCID, next swap epoch, counters reset."""
        with self._lock:
            sim = self._sims.get(msisdn)
            if sim is None:
                raise UnknownMsisdn(msisdn)
            swapped = replace(sim, iccid=self._mint_iccid(), swap_epoch=sim.swap_epoch + 1,
                              failed_attempts=0, locked=False)
            self._sims[msisdn] = swapped
        self._log(AuditEvent.SIM_SWAPPED, msisdn=msisdn, swap_epoch=swapped.swap_epoch)
        return swapped

    def unlock_sim(self, msisdn: str) -> SimCard:
        with self._lock:
            sim = self._sims.get(msisdn)
            if sim is None:
                raise UnknownMsisdn(msisdn)
            if not sim.locked:
                raise NotLocked(msisdn)
            unlocked = replace(sim, failed_attempts=0, locked=False)
            self._sims[msisdn] = unlocked
        self._log(AuditEvent.UNLOCKED, msisdn=msisdn)
        return unlocked

    def debug_state(self) -> dict:
        """JSON-able snapshot of operator state, for persistence and probes."""
        with self._lock:
            return {
                m: {"iccid": s.iccid, "pin_hash": s.pin_hash,
                    "failed_attempts": s.failed_attempts, "locked": s.locked,
                    "swap_epoch": s.swap_epoch}
                for m, s in self._sims.items()
            }
