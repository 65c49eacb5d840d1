"""Experiment harness.

Builds a fully wired world (operator, gateway, authentication server, SSO
baseline) on one deterministic simulator, drives complete authentication
journeys through it, and runs the four studies: scenario batches, method
comparison, session-integrity under disruptions, and multi-user load.
"""

from __future__ import annotations

import hashlib
import time
from collections import Counter, defaultdict
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from typing import Optional

from .audit import AuditLog
from .auth import (Accept, AuthService, MAX_LEG_RETRIES, sample_token_latency_ms)
from .domain import (METHOD_MMA, METHOD_SSO, FailureReason, OutcomeRecord)
from .errors import ChannelLost, ConfigError, RateLimited
from .hashing import SecretHasher
from .mno import MnoSimulator, sample_verify_latency_ms
from .netsim import (GSM_PROFILES, INTERNET, PROFILES, Delivered, GsmProfile,
                     NetworkProfile, Simulator, TimeCursor, disruption_schedule,
                     gsm_profile, profile, transmit)
from .sealing import SealedChannel, derive_key
from .sso import SsoService
from .stats import StatsSummary, compare_samples, mean, percentile, sample_sd
from .tokens import TokenSigner
from .ussd import UssdGateway, sample_pin_entry_ms

INTERNET_REQUEST_BYTES = 900
# Backoff between client-side retries of a portal request that has no
# authentication session to recover yet.
CLIENT_BACKOFF_MS = 500.0
# Share of the keypad time spent getting from the prompt to the PIN screen;
# the entry model covers both, this only places the menu exchange in time.
MENU_SHARE = 0.3
MIN_ATTEMPTS = 30
DEFAULT_ATTEMPTS = 500

# Fixed worker count: chunking must not depend on the machine, or two hosts
# given the same seed would disagree byte for byte.
WORKERS = 4

# Horizon over which mid-session disruptions are drawn in the integrity
# study; matches the nominal span of one approval journey.
INTEGRITY_HORIZON_S = 8.0

DEFAULT_PIN = "4821"
DEFAULT_PASSWORD = "correct-horse-battery"


@dataclass(frozen=True)
class ScenarioSpec:
    method: str
    profile: str
    gsm: str = "stable"
    attempts: int = DEFAULT_ATTEMPTS
    seed: int = 1

    def __post_init__(self) -> None:
        if self.method not in (METHOD_MMA, METHOD_SSO):
            raise ConfigError(f"method must be {METHOD_MMA!r} or {METHOD_SSO!r}")
        if self.attempts < MIN_ATTEMPTS:
            raise ConfigError(f"attempts must be at least {MIN_ATTEMPTS} "
                              f"for stable estimates, got {self.attempts}")
        if self.profile not in PROFILES:
            raise ConfigError(f"unknown profile {self.profile!r}")
        if self.gsm not in GSM_PROFILES:
            raise ConfigError(f"unknown gsm profile {self.gsm!r}")


@dataclass(frozen=True)
class LoadSpec:
    users: int
    ramp_s: float = 60.0
    sustain_s: float = 900.0
    method: str = METHOD_MMA
    profile: str = "good"
    gsm: str = "stable"
    seed: int = 1

    def __post_init__(self) -> None:
        if self.users < 1:
            raise ConfigError("need at least one user")
        if self.ramp_s < 0 or self.sustain_s <= 0:
            raise ConfigError("ramp must be >= 0 and sustain > 0")
        if self.method not in (METHOD_MMA, METHOD_SSO):
            raise ConfigError(f"method must be {METHOD_MMA!r} or {METHOD_SSO!r}")


@dataclass
class World:
    sim: Simulator
    mno: MnoSimulator
    gateway: UssdGateway
    auth: AuthService
    sso: SsoService
    audit: AuditLog
    pin_channel: SealedChannel


def build_world(seed: int, hasher: Optional[SecretHasher] = None,
                seal_pin_channel: bool = True,
                service_name: str = "Demo Portal",
                instance: int = 0,
                sim: Optional[Simulator] = None) -> World:
    """Wire every component onto one simulator.

    Keys and salts are derived from the seed; simulation runs do not need
    unpredictable secrets, they need reproducible ones.  ``instance`` lets a
    worker pool build several independent worlds from one logical seed, and
    passing ``sim`` substitutes a different clock (the HTTP facade runs the
    same wiring on wall time).
    """
    tag = str(seed) if instance == 0 else f"{seed}.{instance}"
    sim_seed = seed if instance == 0 else int.from_bytes(
        hashlib.sha256(tag.encode()).digest()[:8], "big")
    sim = sim or Simulator(sim_seed)
    hasher = hasher or SecretHasher.fast()
    master = derive_key(b"world-master", tag)
    audit = AuditLog()
    pin_channel = SealedChannel("gateway-operator-pin",
                                derive_key(master, "pin-leg"),
                                enabled=seal_pin_channel)
    mno = MnoSimulator(hasher, sim, rng_ids=sim.stream("ids"),
                       rng_gsm=sim.stream("gsm"), audit=audit,
                       pin_channel=pin_channel)
    gateway = UssdGateway(mno, sim, rng=sim.stream("ussd"), service_name=service_name)
    mno.attach_gateway(gateway)
    auth = AuthService(mno, gateway, sim, rng=sim.stream("auth"),
                       signer=TokenSigner(derive_key(master, "token-sign")),
                       audit=audit, binding_salt=derive_key(master, "sim-binding"))
    sso = SsoService(hasher, TokenSigner(derive_key(master, "web-token-sign")),
                     sim, rng_net=sim.stream("sso_net"),
                     rng_human=sim.stream("sso_human"), rng_ids=sim.stream("sso_ids"))
    return World(sim=sim, mno=mno, gateway=gateway, auth=auth, sso=sso,
                 audit=audit, pin_channel=pin_channel)


def enroll_mma_user(world: World, msisdn: str, pin: str = DEFAULT_PIN,
                    name: str = "Subscriber") -> None:
    world.mno.register_sim(msisdn, pin)
    world.auth.register_user(msisdn, name)


def enroll_sso_account(world: World, email: str, password: str = DEFAULT_PASSWORD,
                       otp_enabled: bool = False) -> None:
    world.sso.register_account(email, password, otp_enabled=otp_enabled)


def _internet_leg(prof: NetworkProfile, rng, cursor: TimeCursor,
                  comps: dict, key: str) -> bool:
    """One request/response round trip with client-side retries.

    No session exists to recover on this path, so a failed round trip just
    backs off and tries again, up to the leg retry cap.
    """
    for attempt in range(1 + MAX_LEG_RETRIES):
        delay = 0.0
        ok = True
        for _ in range(2):
            result = transmit(INTERNET_REQUEST_BYTES, INTERNET, prof, rng)
            if not isinstance(result, Delivered):
                ok = False
                break
            delay += result.delay_ms
        if ok:
            cursor.advance(delay)
            comps[key] += delay / 1000.0
            return True
        if attempt < MAX_LEG_RETRIES:
            cursor.advance(CLIENT_BACKOFF_MS)
            comps["recovery_wait"] += CLIENT_BACKOFF_MS / 1000.0
    return False


def mma_journey(world: World, msisdn: str, pin: str = DEFAULT_PIN,
                prof: NetworkProfile | None = None,
                gsm: GsmProfile | None = None,
                cursor: Optional[TimeCursor] = None,
                deny: bool = False,
                injected_drops: Optional[list[tuple[float, float]]] = None
                ) -> OutcomeRecord:
    """Drive one complete approval journey and account for its time.

    The journey owns transport orchestration: it retries dropped legs within
    the per-leg cap, asks the server to recover within the session budget,
    and walks away when either is exhausted. ``injected_drops`` feeds the
    integrity study: scheduled disruptions applied mid-session on top of
    (usually zeroed) per-exchange drop draws.
    """
    sim = world.sim
    auth = world.auth
    prof = prof or PROFILES["good"]
    gsm = gsm or GSM_PROFILES["stable"]
    cursor = cursor or TimeCursor(sim, advance_clock=True)
    rng_net = sim.stream("inet")
    rng_human = sim.stream("human")
    rng_recovery = sim.stream("recovery")
    rng_gsm = sim.stream("gsm")
    rng_server = sim.stream("server")

    comps: dict[str, float] = defaultdict(float)
    retries = 0
    started = cursor.now()

    def record(success: bool, reason: Optional[FailureReason],
               interactions: int) -> OutcomeRecord:
        finished = cursor.now()
        return OutcomeRecord(
            method=METHOD_MMA, profile=prof.name, gsm=gsm.name,
            started_ms=started, finished_ms=finished,
            success=success, failure_reason=reason,
            auth_time_s=(finished - started) / 1000.0,
            interaction_count=interactions, retries=retries,
            components_s=dict(comps))

    def recover_or_fail(sid: str) -> bool:
        nonlocal retries
        delay_s = auth.sample_reconnect_delay_s(rng_recovery)
        if not auth.recover_session(sid, delay_s):
            return False
        cursor.advance(delay_s * 1000.0)
        comps["recovery_wait"] += delay_s
        retries += 1
        return True

    # Portal request over the internet path; no session to recover yet.
    if not _internet_leg(prof, rng_net, cursor, comps, "portal_request"):
        return record(False, FailureReason.NETWORK_DROP, 0)

    session = auth.initiate_auth(msisdn, gsm)
    sid = session.session_id

    # Approval push to the handset, with recovery between re-pushes.
    delivery = auth.last_push_delivery(sid)
    leg_failures = 0
    while not delivery.delivered:
        leg_failures += 1
        if leg_failures > MAX_LEG_RETRIES:
            auth.fail_network(sid)
            return record(False, FailureReason.NETWORK_DROP, 0)
        if not recover_or_fail(sid):
            return record(False, FailureReason.NETWORK_DROP, 0)
        delivery = auth.retry_push(sid)
    cursor.advance(delivery.delay_ms)
    comps["ussd_push"] += delivery.delay_ms / 1000.0

    # Scheduled mid-session disruptions (integrity study) land here, once
    # the session is live on the handset.
    if injected_drops:
        for _drop_at, reconnect_after in injected_drops:
            if not auth.recover_session(sid, reconnect_after):
                return record(False, FailureReason.NETWORK_DROP, 0)
            cursor.advance(reconnect_after * 1000.0)
            comps["recovery_wait"] += reconnect_after
            retries += 1

    ussd_sid = auth.get_session(sid).ussd_session_id

    # Keypad time covers reading the prompt, choosing "1" (that exchange
    # included) and typing four digits; only the split is modeled.
    entry_ms = sample_pin_entry_ms(rng_human)
    comps["pin_entry"] += entry_ms / 1000.0
    cursor.advance(entry_ms * MENU_SHARE)

    def gsm_exchange(text: str) -> bool:
        nonlocal retries
        failures = 0
        while True:
            try:
                world.gateway.submit_input(ussd_sid, text)
                return True
            except ChannelLost:
                failures += 1
                if failures > MAX_LEG_RETRIES:
                    auth.fail_network(sid)
                    return False
                if not recover_or_fail(sid):
                    return False

    if not gsm_exchange("2" if deny else "1"):
        return record(False, FailureReason.NETWORK_DROP, 1)
    if deny:
        return record(False, FailureReason.DENIED, 1)
    cursor.advance(entry_ms * (1.0 - MENU_SHARE))

    if not gsm_exchange(pin):
        return record(False, FailureReason.NETWORK_DROP, 2)
    verify_ms = sample_verify_latency_ms(gsm, rng_gsm)
    cursor.advance(verify_ms)
    comps["pin_verification"] += verify_ms / 1000.0

    state = auth.get_session(sid).state.value
    if state == "LOCKED_OUT":
        return record(False, FailureReason.LOCKOUT, 2)
    if state == "DENIED":
        return record(False, FailureReason.DENIED, 2)
    if state == "PIN_PENDING":
        # wrong PIN and the user walked away after one try
        return record(False, FailureReason.BAD_CREDENTIALS, 2)

    token_ms = sample_token_latency_ms(rng_server)
    cursor.advance(token_ms)
    comps["token_issue"] += token_ms / 1000.0
    token = auth.complete_auth(sid)

    # First authenticated resource fetch; the session can still recover here.
    leg_failures = 0
    while True:
        delay = 0.0
        ok = True
        for _ in range(2):
            result = transmit(INTERNET_REQUEST_BYTES, INTERNET, prof, rng_net)
            if not isinstance(result, Delivered):
                ok = False
                break
            delay += result.delay_ms
        if ok:
            cursor.advance(delay)
            comps["service_access"] += delay / 1000.0
            break
        leg_failures += 1
        if leg_failures > MAX_LEG_RETRIES:
            auth.fail_network(sid)
            return record(False, FailureReason.NETWORK_DROP, 2)
        if not recover_or_fail(sid):
            return record(False, FailureReason.NETWORK_DROP, 2)

    granted = auth.grant_resource(token)
    if not isinstance(granted, Accept):
        return record(False, FailureReason.OTHER, 2)
    return record(True, None, 2)


def sso_journey(world: World, email: str, password: str = DEFAULT_PASSWORD,
                prof: NetworkProfile | None = None,
                cursor: Optional[TimeCursor] = None) -> OutcomeRecord:
    prof = prof or PROFILES["good"]
    cursor = cursor or TimeCursor(world.sim, advance_clock=True)
    outcome, _token = world.sso.sso_login(email, password, prof, cursor)
    return outcome


def _run_method(world: World, method: str, prof: NetworkProfile,
                gsm: GsmProfile, attempts: int,
                index_base: int = 0) -> list[OutcomeRecord]:
    records = []
    for k in range(attempts):
        i = index_base + k
        if method == METHOD_MMA:
            msisdn = f"+25471{i:07d}"
            enroll_mma_user(world, msisdn)
            records.append(mma_journey(world, msisdn, prof=prof, gsm=gsm))
        else:
            email = f"subscriber{i}@portal.test"
            enroll_sso_account(world, email)
            records.append(sso_journey(world, email, prof=prof))
    return records


@dataclass
class ScenarioResult:
    spec: ScenarioSpec
    records: list[OutcomeRecord]
    elapsed_wall_s: float

    @property
    def success_rate(self) -> float:
        return sum(1 for r in self.records if r.success) / len(self.records)

    def summary(self) -> dict:
        return summarize_records(self.records)


def _scenario_chunk(spec: ScenarioSpec, worker: int, start: int,
                    count: int) -> list[OutcomeRecord]:
    world = build_world(spec.seed, instance=worker)
    return _run_method(world, spec.method, profile(spec.profile),
                       gsm_profile(spec.gsm), count, index_base=start)


def run_scenario(spec: ScenarioSpec, world: Optional[World] = None,
                 workers: int = WORKERS) -> ScenarioResult:
    """Run a batch of independent journeys and collect their outcomes.

    Attempts are split into contiguous chunks, one private world per worker
    thread.  Chunk boundaries and world seeds depend only on the spec and the
    worker count, and results are concatenated in chunk order, so scheduling
    cannot change the output.  Passing an explicit ``world`` runs everything
    in it sequentially instead.
    """
    t0 = time.perf_counter()
    if world is not None or workers <= 1 or spec.attempts < 2 * WORKERS:
        world = world or build_world(spec.seed)
        records = _run_method(world, spec.method, profile(spec.profile),
                              gsm_profile(spec.gsm), spec.attempts)
    else:
        base, extra = divmod(spec.attempts, workers)
        chunks = []
        start = 0
        for w in range(workers):
            count = base + (1 if w < extra else 0)
            chunks.append((w, start, count))
            start += count
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            futures = [pool.submit(_scenario_chunk, spec, w, s, c)
                       for w, s, c in chunks]
            records = [r for f in futures for r in f.result()]
    return ScenarioResult(spec=spec, records=records,
                          elapsed_wall_s=time.perf_counter() - t0)


def summarize_records(records: list[OutcomeRecord]) -> dict:
    """Aggregate one batch of outcomes into a report-ready dict."""
    n = len(records)
    successes = [r for r in records if r.success]
    times = [r.auth_time_s for r in successes]
    failures = Counter(r.failure_reason.value for r in records if not r.success)
    comp_totals: dict[str, float] = defaultdict(float)
    for r in successes:
        for k, v in r.components_s.items():
            comp_totals[k] += v
    out = {
        "attempts": n,
        "successes": len(successes),
        "success_rate": round(len(successes) / n, 6) if n else 0.0,
        "failures": dict(sorted(failures.items())),
        "retries_total": sum(r.retries for r in records),
        "incident_rate": round(sum(1 for r in records if r.incident) / n, 6) if n else 0.0,
    }
    if times:
        out["auth_time_s"] = {
            "mean": round(mean(times), 6),
            "sd": round(sample_sd(times), 6) if len(times) > 1 else 0.0,
            "p50": round(percentile(times, 50), 6),
            "p95": round(percentile(times, 95), 6),
            "p99": round(percentile(times, 99), 6),
            "min": round(min(times), 6),
            "max": round(max(times), 6),
        }
        out["component_means_s"] = {
            k: round(v / len(successes), 6) for k, v in sorted(comp_totals.items())
        }
        out["interaction_count_mean"] = round(
            mean([float(r.interaction_count) for r in successes]), 6)
    return out


@dataclass
class CompareResult:
    profile: str
    gsm: str
    attempts: int
    seed: int
    mma: ScenarioResult
    sso: ScenarioResult
    summary: StatsSummary  # a = approval flow, b = password baseline

    @property
    def mean_gap_s(self) -> float:
        return self.summary.mean_diff


def compare_methods(profile_name: str = "good", attempts: int = DEFAULT_ATTEMPTS,
                    seed: int = 1, gsm_name: str = "stable") -> CompareResult:
    """Run both methods under one condition and compare completed-login times."""
    if attempts < MIN_ATTEMPTS:
        raise ConfigError(f"attempts must be at least {MIN_ATTEMPTS}")
    mma = run_scenario(ScenarioSpec(METHOD_MMA, profile_name, gsm_name,
                                    attempts, seed))
    sso = run_scenario(ScenarioSpec(METHOD_SSO, profile_name, gsm_name,
                                    attempts, seed))
    mma_times = [r.auth_time_s for r in mma.records if r.success]
    sso_times = [r.auth_time_s for r in sso.records if r.success]
    summary = compare_samples(mma_times, sso_times)
    return CompareResult(
        profile=profile_name, gsm=gsm_name, attempts=attempts, seed=seed,
        mma=mma, sso=sso, summary=summary)


@dataclass
class IntegrityResult:
    sessions: int
    seed: int
    affected: int
    recovered: int
    failed_after_drop: int
    recovery_rate: float
    mean_reconnect_s: float
    reconnect_count: int
    overall_success_rate: float
    drop_histogram: dict[int, int]
    elapsed_wall_s: float

    def to_json_dict(self) -> dict:
        return {
            "sessions": self.sessions,
            "seed": self.seed,
            "affected": self.affected,
            "recovered": self.recovered,
            "failed_after_drop": self.failed_after_drop,
            "recovery_rate": round(self.recovery_rate, 6),
            "mean_reconnect_s": round(self.mean_reconnect_s, 6),
            "reconnect_count": self.reconnect_count,
            "overall_success_rate": round(self.overall_success_rate, 6),
            "drop_histogram": {str(k): v for k, v in sorted(self.drop_histogram.items())},
        }


def run_session_integrity(sessions: int = 10_000, seed: int = 1,
                          gsm_name: str = "intermittent",
                          profile_name: str = "good") -> IntegrityResult:
    """Subject live sessions to scheduled disruptions and measure recovery.

    Per-exchange drops are zeroed so every failure is attributable to the
    scheduled outages: a session fails only by blowing the recovery budget
    or hitting a reconnect past the hard cap.
    """
    world = build_world(seed)
    disrupted_gsm = gsm_profile(gsm_name)
    quiet_gsm = replace(gsm_profile("stable"), drop_prob=0.0)
    prof = replace(profile(profile_name), loss_prob=0.0)
    rng = world.sim.stream("disruption")
    t0 = time.perf_counter()
    affected = recovered = failed_after_drop = 0
    reconnects: list[float] = []
    histogram: Counter = Counter()
    successes = 0
    for i in range(sessions):
        msisdn = f"+25472{i:07d}"
        enroll_mma_user(world, msisdn)
        drops = disruption_schedule(disrupted_gsm, INTEGRITY_HORIZON_S, rng)
        histogram[len(drops)] += 1
        rec = mma_journey(world, msisdn, prof=prof, gsm=quiet_gsm,
                          injected_drops=drops)
        if rec.success:
            successes += 1
        if drops:
            affected += 1
            if rec.success:
                recovered += 1
                reconnects.extend(d for _, d in drops)
            else:
                failed_after_drop += 1
                # count only the reconnects that actually happened
                reconnects.extend(d for _, d in drops[:rec.retries])
    rate = recovered / affected if affected else 1.0
    return IntegrityResult(
        sessions=sessions, seed=seed, affected=affected, recovered=recovered,
        failed_after_drop=failed_after_drop, recovery_rate=rate,
        mean_reconnect_s=mean(reconnects) if reconnects else 0.0,
        reconnect_count=len(reconnects),
        overall_success_rate=successes / sessions,
        drop_histogram=dict(histogram),
        elapsed_wall_s=time.perf_counter() - t0)


@dataclass
class BucketStats:
    minute: int
    journeys: int
    successes: int
    p50_ms: float
    p95_ms: float
    p99_ms: float

    def to_json_dict(self) -> dict:
        return {"minute": self.minute, "journeys": self.journeys,
                "successes": self.successes, "p50_ms": round(self.p50_ms, 3),
                "p95_ms": round(self.p95_ms, 3), "p99_ms": round(self.p99_ms, 3)}


@dataclass
class LoadReport:
    spec: LoadSpec
    journeys_started: int
    journeys_succeeded: int
    journeys_failed: int
    error_rate: float
    p50_ms: float
    p95_ms: float
    p99_ms: float
    peak_in_flight: int
    events_processed: int
    audit_records: int
    sessions_tracked: int
    buckets: list[BucketStats]
    elapsed_wall_s: float

    def to_json_dict(self) -> dict:
        return {
            "users": self.spec.users,
            "ramp_s": self.spec.ramp_s,
            "sustain_s": self.spec.sustain_s,
            "method": self.spec.method,
            "profile": self.spec.profile,
            "gsm": self.spec.gsm,
            "seed": self.spec.seed,
            "journeys_started": self.journeys_started,
            "journeys_succeeded": self.journeys_succeeded,
            "journeys_failed": self.journeys_failed,
            "error_rate": round(self.error_rate, 6),
            "p50_ms": round(self.p50_ms, 3),
            "p95_ms": round(self.p95_ms, 3),
            "p99_ms": round(self.p99_ms, 3),
            "peak_in_flight": self.peak_in_flight,
            "resources": {
                "events_processed": self.events_processed,
                "audit_records": self.audit_records,
                "sessions_tracked": self.sessions_tracked,
            },
            "buckets": [b.to_json_dict() for b in self.buckets],
        }


THINK_TIME_MS = (8_000.0, 16_000.0)


def run_load(spec: LoadSpec) -> LoadReport:
    """Event-driven multi-user run: ramp users in linearly, loop journeys.

    Each journey computes its own duration on a detached cursor; start and
    completion events move the in-flight gauge on the shared clock, so
    concurrency is modeled without interleaving the journeys themselves.
    """
    world = build_world(spec.seed)
    sim = world.sim
    prof = profile(spec.profile)
    gsm = gsm_profile(spec.gsm)
    think_rng = sim.stream("think")
    window_ms = (spec.ramp_s + spec.sustain_s) * 1000.0
    bucket_count = max(1, int((spec.ramp_s + spec.sustain_s) // 60))

    identities = []
    for i in range(spec.users):
        if spec.method == METHOD_MMA:
            msisdn = f"+25473{i:07d}"
            enroll_mma_user(world, msisdn)
            identities.append(msisdn)
        else:
            email = f"load{i}@portal.test"
            enroll_sso_account(world, email)
            identities.append(email)

    records: list[OutcomeRecord] = []
    state = {"in_flight": 0, "peak": 0}

    def start_journey(identity: str) -> None:
        if sim.now() >= window_ms:
            return
        cursor = TimeCursor(sim, advance_clock=False)
        try:
            if spec.method == METHOD_MMA:
                rec = mma_journey(world, identity, prof=prof, gsm=gsm, cursor=cursor)
            else:
                rec = sso_journey(world, identity, prof=prof, cursor=cursor)
        except RateLimited:
            # an improbably quick run of short journeys; sit out one think
            sim.schedule_in(think_rng.uniform(*THINK_TIME_MS),
                            partial(start_journey, identity))
            return
        state["in_flight"] += 1
        state["peak"] = max(state["peak"], state["in_flight"])
        records.append(rec)
        duration_ms = rec.finished_ms - rec.started_ms

        def complete() -> None:
            state["in_flight"] -= 1
            think = think_rng.uniform(*THINK_TIME_MS)
            sim.schedule_in(think, partial(start_journey, identity))

        sim.schedule_in(duration_ms, complete)

    t0 = time.perf_counter()
    for i, identity in enumerate(identities):
        offset = spec.ramp_s * 1000.0 * i / spec.users
        sim.schedule(offset, partial(start_journey, identity))
    sim.run_all()

    durations = [r.finished_ms - r.started_ms for r in records if r.success]
    failures = sum(1 for r in records if not r.success)
    buckets = []
    by_minute: dict[int, list[OutcomeRecord]] = defaultdict(list)
    for r in records:
        by_minute[min(int(r.started_ms // 60_000), bucket_count - 1)].append(r)
    for minute in range(bucket_count):
        rs = by_minute.get(minute, [])
        ds = [r.finished_ms - r.started_ms for r in rs if r.success]
        buckets.append(BucketStats(
            minute=minute, journeys=len(rs),
            successes=sum(1 for r in rs if r.success),
            p50_ms=percentile(ds, 50) if ds else 0.0,
            p95_ms=percentile(ds, 95) if ds else 0.0,
            p99_ms=percentile(ds, 99) if ds else 0.0))
    return LoadReport(
        spec=spec,
        journeys_started=len(records),
        journeys_succeeded=len(records) - failures,
        journeys_failed=failures,
        error_rate=failures / len(records) if records else 0.0,
        p50_ms=percentile(durations, 50) if durations else 0.0,
        p95_ms=percentile(durations, 95) if durations else 0.0,
        p99_ms=percentile(durations, 99) if durations else 0.0,
        peak_in_flight=state["peak"],
        events_processed=sim.events_processed,
        audit_records=len(world.audit.records()),
        sessions_tracked=world.auth.session_count(),
        buckets=buckets,
        elapsed_wall_s=time.perf_counter() - t0)
