"""Deterministic discrete-event network simulator.

Provides the virtual clock, named reproducible RNG streams, connectivity
profiles for the internet path and the GSM signaling path, single-transmission
impairment sampling, and disruption schedules for longer-lived sessions.

All durations are virtual milliseconds unless the name says otherwise
(``*_s`` fields are seconds). Two runs with the same master seed produce the
same event order and the same sampled values; streams are derived from the
seed by name, so adding draws to one stream never shifts another.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

from .errors import ConfigError

INTERNET = "internet"
GSM = "gsm"


@dataclass(frozen=True)
class NetworkProfile:
    """Internet-path connectivity class.

    ``loss_prob`` applies per transmission; a round trip is two transmissions
    and therefore two loss draws. ``disconnect_rate_per_s`` feeds
    :func:`disruption_schedule` for session-scale outages.
    """

    name: str
    bandwidth_kbps: float
    latency_ms: float
    jitter_ms: float
    loss_prob: float
    disconnect_rate_per_s: float

    def __post_init__(self) -> None:
        if self.bandwidth_kbps <= 0 or self.latency_ms < 0:
            raise ConfigError(f"profile {self.name}: bandwidth/latency out of range")
        if not 0.0 <= self.loss_prob <= 1.0:
            raise ConfigError(f"profile {self.name}: loss_prob must be in [0,1]")


@dataclass(frozen=True)
class GsmProfile:
    """Signaling-path (USSD bearer) connectivity class.

    ``drop_prob`` is the chance a single signaling exchange dies and has to be
    redone; latency is sampled truncated-normal around ``latency_ms_mean``.
    """

    name: str
    drop_prob: float
    latency_ms_mean: float
    latency_ms_jitter: float
    disconnect_rate_per_s: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.drop_prob <= 1.0:
            raise ConfigError(f"gsm profile {self.name}: drop_prob must be in [0,1]")
        if self.latency_ms_mean <= 0:
            raise ConfigError(f"gsm profile {self.name}: latency must be positive")


# Internet classes. Loss values are calibrated per transmission so that a
# three-round-trip exchange (six draws) survives with p ~ 0.994 / 0.941 / 0.80.
GOOD = NetworkProfile("good", bandwidth_kbps=15_000, latency_ms=50, jitter_ms=10,
                      loss_prob=0.001, disconnect_rate_per_s=1 / 600)
MODERATE = NetworkProfile("moderate", bandwidth_kbps=2_000, latency_ms=150, jitter_ms=40,
                          loss_prob=0.010, disconnect_rate_per_s=1 / 180)
POOR = NetworkProfile("poor", bandwidth_kbps=250, latency_ms=300, jitter_ms=100,
                      loss_prob=0.0365, disconnect_rate_per_s=1 / 60)

# Signaling classes. drop_prob for "poor" is calibrated jointly with the
# retry budget (two automatic retries per leg, three recoveries per session)
# so that end-to-end success under sustained poor coverage lands near 95%.
GSM_STABLE = GsmProfile("stable", drop_prob=0.005, latency_ms_mean=800,
                        latency_ms_jitter=200, disconnect_rate_per_s=0.0033)
GSM_INTERMITTENT = GsmProfile("intermittent", drop_prob=0.05, latency_ms_mean=1200,
                              latency_ms_jitter=400, disconnect_rate_per_s=0.065)
GSM_POOR = GsmProfile("poor", drop_prob=0.23, latency_ms_mean=2000,
                      latency_ms_jitter=800, disconnect_rate_per_s=0.12)

PROFILES: dict[str, NetworkProfile] = {p.name: p for p in (GOOD, MODERATE, POOR)}
GSM_PROFILES: dict[str, GsmProfile] = {g.name: g for g in (GSM_STABLE, GSM_INTERMITTENT, GSM_POOR)}

# Reconnection model after a mid-session disruption: exponential with this
# mean, hard-capped. A draw landing on the cap is treated as "never came back
# inside the window" by the recovery logic.
RECONNECT_MEAN_S = 1.8
RECONNECT_CAP_S = 10.0


def profile(name: str) -> NetworkProfile:
    try:
        return PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown network profile {name!r}; have {sorted(PROFILES)}") from None


def gsm_profile(name: str) -> GsmProfile:
    try:
        return GSM_PROFILES[name]
    except KeyError:
        raise ConfigError(f"unknown gsm profile {name!r}; have {sorted(GSM_PROFILES)}") from None


@dataclass(order=True)
class _Event:
    at: float
    seq: int
    action: Callable[[], None] = field(compare=False)
    cancelled: bool = field(default=False, compare=False)


class Simulator:
    """Virtual clock plus event queue plus named RNG streams.

    Events fire in (time, insertion order); actions may schedule further
    events. The clock only moves through :meth:`run_until` / :meth:`advance`,
    never backwards.
    """

    def __init__(self, seed: int) -> None:
        self.seed = int(seed)
        self._now = 0.0
        self._seq = 0
        self._queue: list[_Event] = []
        self._streams: dict[str, random.Random] = {}
        self.events_processed = 0

    def now(self) -> float:
        """Current virtual time in milliseconds."""
        return self._now

    def stream(self, name: str) -> random.Random:
        """Deterministic RNG dedicated to ``name``.

        The stream seed is derived by hashing the master seed together with
        the name, so streams are independent of each other and stable across
        runs and platforms.
        """
        rng = self._streams.get(name)
        if rng is None:
            digest = hashlib.sha256(f"{self.seed}:{name}".encode()).digest()
            rng = random.Random(int.from_bytes(digest[:16], "big"))
            self._streams[name] = rng
        return rng

    def schedule(self, at_ms: float, action: Callable[[], None]) -> _Event:
        if at_ms < self._now:
            raise ConfigError(f"cannot schedule into the past ({at_ms} < {self._now})")
        ev = _Event(at=float(at_ms), seq=self._seq, action=action)
        self._seq += 1
        heapq.heappush(self._queue, ev)
        return ev

    def schedule_in(self, delay_ms: float, action: Callable[[], None]) -> _Event:
        return self.schedule(self._now + max(0.0, delay_ms), action)

    def cancel(self, event: _Event) -> None:
        event.cancelled = True

    def run_until(self, t_end_ms: float) -> int:
        """Execute all events due at or before ``t_end_ms``; return the count.

        The clock lands exactly on ``t_end_ms`` afterwards even if the queue
        ran dry earlier.
        """
        ran = 0
        while self._queue and self._queue[0].at <= t_end_ms:
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self._now = ev.at
            ev.action()
            ran += 1
            self.events_processed += 1
        if t_end_ms > self._now:
            self._now = float(t_end_ms)
        return ran

    def run_all(self, hard_stop_ms: float = float("inf")) -> int:
        """Drain the queue, stopping early if ``hard_stop_ms`` is reached."""
        ran = 0
        while self._queue:
            if self._queue[0].at > hard_stop_ms:
                break
            ev = heapq.heappop(self._queue)
            if ev.cancelled:
                continue
            self._now = ev.at
            ev.action()
            ran += 1
            self.events_processed += 1
        return ran

    def advance(self, dt_ms: float) -> float:
        """Move the clock forward by ``dt_ms``, firing anything due. Returns now."""
        if dt_ms < 0:
            raise ConfigError("cannot advance by a negative duration")
        self.run_until(self._now + dt_ms)
        return self._now

    def pending(self) -> int:
        return sum(1 for ev in self._queue if not ev.cancelled)


@dataclass(frozen=True)
class LatencyModel:
    """Truncated-normal latency in milliseconds; sampled by rejection."""

    mean_ms: float
    sd_ms: float
    lo_ms: float = 0.0
    hi_ms: float | None = None

    def sample(self, rng: random.Random) -> float:
        return sample_trunc_normal(rng, self.mean_ms, self.sd_ms, self.lo_ms, self.hi_ms)


def sample_trunc_normal(rng: random.Random, mean: float, sd: float,
                        lo: float = 0.0, hi: float | None = None) -> float:
    """Normal(mean, sd) conditioned on [lo, hi], via rejection.

    Rejection keeps the conditional distribution exact. The bounds used in
    this package sit several sigma from the mean, so the loop almost always
    exits on the first draw; after 1000 misses the value is clamped instead
    (unreachable in practice, but keeps the function total).
    """
    if sd <= 0:
        return min(max(mean, lo), hi if hi is not None else mean)
    for _ in range(1000):
        x = rng.gauss(mean, sd)
        if x >= lo and (hi is None or x <= hi):
            return x
    return min(max(mean, lo), hi) if hi is not None else max(mean, lo)


class TimeCursor:
    """A journey's position in time.

    In sequential runs the cursor advances the shared clock directly. In
    concurrent (load) runs many journeys overlap on the event queue, so each
    keeps its own accumulated offset and the shared clock is only moved by
    the event loop.
    """

    def __init__(self, sim: Simulator, advance_clock: bool = True) -> None:
        self._sim = sim
        self._advance_clock = advance_clock
        self._start = sim.now()
        self._offset = 0.0

    def now(self) -> float:
        if self._advance_clock:
            return self._sim.now()
        return self._start + self._offset

    def advance(self, dt_ms: float) -> None:
        if self._advance_clock:
            self._sim.advance(dt_ms)
        else:
            self._offset += max(0.0, dt_ms)

    @property
    def elapsed_ms(self) -> float:
        return self.now() - self._start

    @property
    def started_ms(self) -> float:
        return self._start


@dataclass(frozen=True)
class Delivered:
    delay_ms: float


@dataclass(frozen=True)
class Dropped:
    pass


def transmit(payload_bytes: int, channel: str, prof: NetworkProfile | GsmProfile,
             rng: random.Random) -> Delivered | Dropped:
    """One transmission over one channel: a single loss draw, then a delay.

    Internet delay = propagation latency + jitter (half-normal) +
    serialization (payload_bytes * 8 / bandwidth_kbps). GSM delay is sampled
    around the profile mean; payload size is ignored there because USSD
    screens all fit one signaling unit.
    """
    if channel == INTERNET:
        if not isinstance(prof, NetworkProfile):
            raise ConfigError("internet transmit needs a NetworkProfile")
        if rng.random() < prof.loss_prob:
            return Dropped()
        jitter = sample_trunc_normal(rng, 0.0, prof.jitter_ms, lo=0.0) if prof.jitter_ms > 0 else 0.0
        serialization = payload_bytes * 8.0 / prof.bandwidth_kbps
        return Delivered(prof.latency_ms + jitter + serialization)
    if channel == GSM:
        if not isinstance(prof, GsmProfile):
            raise ConfigError("gsm transmit needs a GsmProfile")
        if rng.random() < prof.drop_prob:
            return Dropped()
        delay = sample_trunc_normal(rng, prof.latency_ms_mean, prof.latency_ms_jitter,
                                    lo=prof.latency_ms_mean * 0.1)
        return Delivered(delay)
    raise ConfigError(f"unknown channel {channel!r}")


def disruption_schedule(prof: NetworkProfile | GsmProfile, duration_s: float,
                        rng: random.Random) -> list[tuple[float, float]]:
    """Connectivity outages over a window, as (drop_at_s, reconnect_after_s).

    Drops arrive as a Poisson process at the profile's disconnect rate;
    reconnection delays are exponential with mean :data:`RECONNECT_MEAN_S`,
    capped at :data:`RECONNECT_CAP_S`. A capped value means the link did not
    come back inside the recovery window.
    """
    rate = prof.disconnect_rate_per_s
    out: list[tuple[float, float]] = []
    if rate <= 0 or duration_s <= 0:
        return out
    t = rng.expovariate(rate)
    while t < duration_s:
        reconnect = min(rng.expovariate(1.0 / RECONNECT_MEAN_S), RECONNECT_CAP_S)
        out.append((t, reconnect))
        t += rng.expovariate(rate)
    return out


def _profile_from_dict(name: str, base: NetworkProfile, d: dict) -> NetworkProfile:
    fields = dict(bandwidth_kbps=base.bandwidth_kbps, latency_ms=base.latency_ms,
                  jitter_ms=base.jitter_ms, loss_prob=base.loss_prob,
                  disconnect_rate_per_s=base.disconnect_rate_per_s)
    unknown = set(d) - set(fields)
    if unknown:
        raise ConfigError(f"profile {name}: unknown keys {sorted(unknown)}")
    fields.update(d)
    return NetworkProfile(name, **fields)


def _gsm_from_dict(name: str, base: GsmProfile, d: dict) -> GsmProfile:
    fields = dict(drop_prob=base.drop_prob, latency_ms_mean=base.latency_ms_mean,
                  latency_ms_jitter=base.latency_ms_jitter,
                  disconnect_rate_per_s=base.disconnect_rate_per_s)
    unknown = set(d) - set(fields)
    if unknown:
        raise ConfigError(f"gsm profile {name}: unknown keys {sorted(unknown)}")
    fields.update(d)
    return GsmProfile(name, **fields)


def load_overrides(path: str | Path) -> tuple[dict[str, NetworkProfile], dict[str, GsmProfile]]:
    """Read profile overrides from a JSON file.

    Layout: {"profiles": {"poor": {"loss_prob": 0.02}}, "gsm": {...}}.
    Unknown profile names or keys raise :class:`ConfigError`. Returns fresh
    dicts; module-level presets stay untouched.
    """
    try:
        raw = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    profiles = dict(PROFILES)
    gsm = dict(GSM_PROFILES)
    for name, d in (raw.get("profiles") or {}).items():
        if name not in profiles:
            raise ConfigError(f"unknown network profile {name!r} in {path}")
        profiles[name] = _profile_from_dict(name, profiles[name], d)
    for name, d in (raw.get("gsm") or {}).items():
        if name not in gsm:
            raise ConfigError(f"unknown gsm profile {name!r} in {path}")
        gsm[name] = _gsm_from_dict(name, gsm[name], d)
    return profiles, gsm
