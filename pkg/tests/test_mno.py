"""Operator registry, PIN lockout, SIM swap, sealed PIN leg."""

import pytest

from mmauth.errors import (DuplicateMsisdn, MalformedPin, NotLocked,
                           SealOpenError, UnknownMsisdn)
from mmauth.hashing import SecretHasher
from mmauth.mno import (MAX_PIN_ATTEMPTS, MnoSimulator, PinResult, PinStatus,
                        sample_push_latency_ms, sample_verify_latency_ms,
                        PUSH_LATENCY_FACTOR, PUSH_LATENCY_FLOOR_MS)
from mmauth.netsim import GSM_PROFILES, Simulator
from mmauth.audit import AuditEvent, AuditLog
from mmauth.sealing import SealedChannel, derive_key


@pytest.fixture
def world():
    sim = Simulator(42)
    audit = AuditLog()
    key = derive_key(b"test-master", "pin-leg")
    mno = MnoSimulator(SecretHasher.fast(), clock=sim,
                       rng_ids=sim.stream("ids"), rng_gsm=sim.stream("gsm"),
                       audit=audit, pin_channel=SealedChannel("pin-leg", key))
    return sim, audit, mno


def test_register_and_verify(world):
    _, _, mno = world
    card = mno.register_sim("+254712345678", "4821")
    assert card.iccid.startswith("89") and len(card.iccid) == 20
    assert mno.verify_pin("+254712345678", "4821") == PinResult(PinStatus.SUCCESS)


def test_registration_rejects_bad_input(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    with pytest.raises(DuplicateMsisdn):
        mno.register_sim("+254712345678", "0000")
    with pytest.raises(MalformedPin):
        mno.register_sim("+254712345679", "48")
    with pytest.raises(MalformedPin):
        mno.register_sim("+254712345679", "abcd")


def test_unknown_msisdn_raises(world):
    _, _, mno = world
    with pytest.raises(UnknownMsisdn):
        mno.verify_pin("+254700000000", "1234")
    with pytest.raises(UnknownMsisdn):
        mno.get_sim("+254700000000")
    assert not mno.has_sim("+254700000000")


def test_three_strikes_counts_down_then_locks(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    assert mno.verify_pin("+254712345678", "0000") == PinResult(PinStatus.WRONG, 2)
    assert mno.verify_pin("+254712345678", "1111") == PinResult(PinStatus.WRONG, 1)
    assert mno.verify_pin("+254712345678", "2222") == PinResult(PinStatus.WRONG, 0)
    assert mno.get_sim("+254712345678").locked
    # correct PIN no longer evaluated once locked
    assert mno.verify_pin("+254712345678", "4821").status is PinStatus.LOCKED


def test_correct_pin_resets_strike_counter(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    mno.verify_pin("+254712345678", "0000")
    mno.verify_pin("+254712345678", "1111")
    assert mno.verify_pin("+254712345678", "4821").status is PinStatus.SUCCESS
    # counter is back at zero, three fresh attempts before lock
    assert mno.verify_pin("+254712345678", "0000").attempts_remaining == 2


def test_lock_events_reach_audit(world):
    _, audit, mno = world
    mno.register_sim("+254712345678", "4821")
    for pin in ("0000", "1111", "2222"):
        mno.verify_pin("+254712345678", pin)
    events = [r.event for r in audit.records()]
    assert events.count(AuditEvent.PIN_FAIL) == 3
    assert AuditEvent.LOCKED in events


def test_unlock_restores_access(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    with pytest.raises(NotLocked):
        mno.unlock_sim("+254712345678")
    for pin in ("0000", "1111", "2222"):
        mno.verify_pin("+254712345678", pin)
    mno.unlock_sim("+254712345678")
    assert mno.verify_pin("+254712345678", "4821").status is PinStatus.SUCCESS


def test_pin_result_invariants():
    with pytest.raises(ValueError):
        PinResult(PinStatus.WRONG)
    with pytest.raises(ValueError):
        PinResult(PinStatus.SUCCESS, attempts_remaining=2)
    assert MAX_PIN_ATTEMPTS == 3


def test_swap_changes_identity_and_resets_lock(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    before = mno.get_sim("+254712345678")
    for pin in ("0000", "1111", "2222"):
        mno.verify_pin("+254712345678", pin)
    swapped = mno.sim_swap("+254712345678")
    assert swapped.iccid != before.iccid
    assert swapped.swap_epoch == before.swap_epoch + 1
    assert not swapped.locked and swapped.failed_attempts == 0
    assert swapped.pin_hash == before.pin_hash


def test_sealed_pin_leg_round_trip(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    wire = mno.pin_channel.send({"msisdn": "+254712345678", "pin": "4821"})
    assert mno.receive_pin_submission(wire).status is PinStatus.SUCCESS
    with pytest.raises(SealOpenError):
        mno.receive_pin_submission(b"\x00" * 48)


def test_push_latency_distribution():
    gsm = GSM_PROFILES["stable"]
    rng = Simulator(5).stream("x")
    xs = [sample_push_latency_ms(gsm, rng) for _ in range(20_000)]
    assert min(xs) >= PUSH_LATENCY_FLOOR_MS
    assert sum(xs) / len(xs) == pytest.approx(
        gsm.latency_ms_mean * PUSH_LATENCY_FACTOR, rel=0.02)
    ys = [sample_verify_latency_ms(gsm, rng) for _ in range(20_000)]
    assert sum(ys) / len(ys) == pytest.approx(gsm.latency_ms_mean, rel=0.02)


def test_push_ussd_on_quiet_profile_opens_menu(world):
    from dataclasses import replace as dc_replace
    _, _, mno = world
    from mmauth.ussd import UssdGateway
    sim_clock = Simulator(1)
    gw = UssdGateway(mno, clock=sim_clock, rng=sim_clock.stream("u"))
    mno.attach_gateway(gw)
    mno.register_sim("+254712345678", "4821")
    quiet = dc_replace(GSM_PROFILES["stable"], drop_prob=0.0)
    delivery = mno.push_ussd("+254712345678", "sess-1", quiet)
    assert delivery.delivered and delivery.ussd_session_id
    assert delivery.delay_ms > 0
    assert gw.current_for_msisdn("+254712345678") is not None


def test_push_ussd_drop_costs_no_time(world):
    from dataclasses import replace as dc_replace
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    always_drop = dc_replace(GSM_PROFILES["stable"], drop_prob=1.0)
    delivery = mno.push_ussd("+254712345678", "sess-1", always_drop)
    assert not delivery.delivered
    assert delivery.ussd_session_id is None
    assert delivery.delay_ms == 0.0


def test_debug_state_has_no_plaintext_pin(world):
    _, _, mno = world
    mno.register_sim("+254712345678", "4821")
    state = mno.debug_state()
    entry = state["+254712345678"]
    assert entry["pin_hash"].startswith("scrypt$")
    assert "4821" not in entry["pin_hash"].split("$", 4)[4]
