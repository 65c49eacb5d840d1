"""HTTP facade for the demo UI and scripted clients.

Runs the same wiring as the experiment harness but on wall time: sampled
latencies become real (scaled) delays, a browser drives the portal side and
a virtual handset drives the USSD side.  All protocol state stays behind
the service objects; this layer only translates HTTP to calls and errors
to status codes.
"""

from __future__ import annotations

import json
import threading
import time
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Header, Request
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel
from starlette.exceptions import HTTPException as StarletteHTTPException

from .auth import Accept, Reject
from .errors import (ChannelLost, ConfigError, DuplicateMsisdn, MalformedMsisdn,
                     MalformedPin, MobileAuthError, NotLocked, RateLimited,
                     StaleSession, TransitionError, UnknownMsisdn,
                     UnknownSession, UnknownUser)
from .harness import MAX_LEG_RETRIES, World, build_world
from .auth import sample_token_latency_ms
from .mno import sample_verify_latency_ms
from .netsim import Simulator, TimeCursor, gsm_profile, profile
from .tokens import parse_token

DEFAULT_SCALE = 1.0
# Demo UI dev server and a same-host deployment; anything else is opt-in.
DEFAULT_CORS_ORIGINS = (
    "http://localhost:5173",
    "http://127.0.0.1:5173",
    "http://localhost:8000",
    "http://127.0.0.1:8000",
)

# Seeded identities for the demo; real enrolment is out of scope.
DEFAULT_FIXTURE = {
    "subscribers": [
        {"msisdn": "+254700000001", "pin": "1234", "name": "Amina Demo"},
        {"msisdn": "+254700000002", "pin": "4821", "name": "Joseph Demo"},
    ],
    "accounts": [
        {"email": "citizen@example.com", "password": "correct-horse-battery",
         "otp_enabled": False},
    ],
}


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str,
                 extra: Optional[dict] = None) -> None:
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.extra = extra or {}


# Protocol errors carry their own meaning; this is just the HTTP spelling.
_ERROR_STATUS = {
    UnknownUser: 404,
    UnknownMsisdn: 404,
    UnknownSession: 404,
    RateLimited: 429,
    MalformedMsisdn: 400,
    MalformedPin: 400,
    DuplicateMsisdn: 409,
    StaleSession: 409,
    TransitionError: 409,
    NotLocked: 409,
    ConfigError: 400,
    ChannelLost: 503,
}


def _to_api_error(exc: MobileAuthError) -> ApiError:
    status = _ERROR_STATUS.get(type(exc), 400)
    return ApiError(status, type(exc).__name__, str(exc) or type(exc).__name__)


class WallClock(Simulator):
    """Model time driven by the wall: now() is scaled elapsed real time.

    RNG streams keep their seed derivation; the event queue goes unused
    because humans and HTTP requests drive everything.
    """

    def __init__(self, seed: int, scale: float) -> None:
        super().__init__(seed)
        if scale <= 0:
            raise ConfigError("scale must be positive")
        self.scale = scale
        self._t0 = time.monotonic()

    def now(self) -> float:
        return (time.monotonic() - self._t0) * 1000.0 / self.scale


def load_fixture(path: str | Path) -> dict:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("fixture must be a JSON object")
    unknown = set(data) - {"subscribers", "accounts"}
    if unknown:
        raise ConfigError(f"unknown fixture keys {sorted(unknown)}")
    return data


class ApiState:
    """Wall-clock world plus the little bits of demo steering state."""

    def __init__(self, seed: int = 1, scale: float = DEFAULT_SCALE,
                 fixture: Optional[dict] = None) -> None:
        self.clock = WallClock(seed, scale)
        self.world: World = build_world(seed, sim=self.clock)
        self.scale = scale
        self.seed = seed
        self.profile_name = "good"
        self.gsm_name = "stable"
        self._push_ready_ms: dict[str, float] = {}
        self._lock = threading.RLock()
        for sub in (fixture or DEFAULT_FIXTURE).get("subscribers", []):
            self.world.mno.register_sim(sub["msisdn"], sub["pin"])
            self.world.auth.register_user(sub["msisdn"], sub.get("name", "Subscriber"))
        for acct in (fixture or DEFAULT_FIXTURE).get("accounts", []):
            self.world.sso.register_account(
                acct["email"], acct["password"],
                otp_enabled=bool(acct.get("otp_enabled", False)))

    def sweep(self) -> None:
        """Lazy housekeeping; every handler calls this instead of a timer."""
        now = self.clock.now()
        self.world.gateway.tick(now)
        self.world.auth.expire_sessions(now)

    def sleep_model_ms(self, ms: float) -> None:
        time.sleep(max(0.0, ms) * self.scale / 1000.0)

    def initiate(self, msisdn: str, gsm_name: Optional[str]) -> str:
        gsm = gsm_profile(gsm_name or self.gsm_name)
        auth = self.world.auth
        session = auth.initiate_auth(msisdn, gsm)
        sid = session.session_id
        # Same retry budget as the scripted journeys; delays accumulate in
        # model time and gate when the handset sees the menu.
        delay_ms = 0.0
        delivery = auth.last_push_delivery(sid)
        leg_failures = 0
        recovery_rng = self.clock.stream("api-recovery")
        while not delivery.delivered:
            leg_failures += 1
            if leg_failures > MAX_LEG_RETRIES:
                auth.fail_network(sid)
                return sid
            wait_s = auth.sample_reconnect_delay_s(recovery_rng)
            if not auth.recover_session(sid, wait_s):
                return sid
            delay_ms += wait_s * 1000.0
            delivery = auth.retry_push(sid)
        delay_ms += delivery.delay_ms
        with self._lock:
            self._push_ready_ms[sid] = self.clock.now() + delay_ms
        return sid

    def push_ready(self, sid: str) -> bool:
        with self._lock:
            ready_at = self._push_ready_ms.get(sid)
        return ready_at is not None and self.clock.now() >= ready_at


class InitiateBody(BaseModel):
    msisdn: str
    profile: Optional[str] = None
    gsm: Optional[str] = None


class RespondBody(BaseModel):
    ussd_session_id: str
    input: str


class SsoBody(BaseModel):
    email: str
    password: str
    otp: Optional[str] = None


class SwapBody(BaseModel):
    msisdn: str


class NetBody(BaseModel):
    profile: Optional[str] = None
    gsm: Optional[str] = None


def create_app(seed: int = 1, scale: float = DEFAULT_SCALE,
               cors_origins: Optional[list[str]] = None,
               fixture: Optional[dict] = None) -> FastAPI:
    state = ApiState(seed=seed, scale=scale, fixture=fixture)
    app = FastAPI(title="Mobile money authentication demo",
                  version="0.1.0", docs_url="/docs")
    app.state.auth_state = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=list(cors_origins or DEFAULT_CORS_ORIGINS),
        allow_methods=["*"],
        allow_headers=["*"],
    )

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError) -> JSONResponse:
        body = {"code": exc.code, "message": exc.message, **exc.extra}
        return JSONResponse(status_code=exc.status, content=body)

    @app.exception_handler(MobileAuthError)
    async def on_domain_error(request: Request, exc: MobileAuthError) -> JSONResponse:
        err = _to_api_error(exc)
        return JSONResponse(status_code=err.status,
                            content={"code": err.code, "message": err.message})

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request,
                                  exc: RequestValidationError) -> JSONResponse:
        return JSONResponse(status_code=400,
                            content={"code": "MalformedRequest",
                                     "message": "request body failed validation"})

    @app.exception_handler(StarletteHTTPException)
    async def on_http_error(request: Request,
                            exc: StarletteHTTPException) -> JSONResponse:
        code = "NotFound" if exc.status_code == 404 else f"Http{exc.status_code}"
        return JSONResponse(status_code=exc.status_code,
                            content={"code": code, "message": str(exc.detail)})

    @app.get("/health")
    def health() -> dict:
        return {"status": "ok", "mode": "wall-clock", "scale": state.scale,
                "seed": state.seed, "profile": state.profile_name,
                "gsm": state.gsm_name}

    @app.post("/auth/initiate", status_code=202)
    def auth_initiate(body: InitiateBody) -> dict:
        state.sweep()
        if body.profile:
            profile(body.profile)  # unknown name -> ConfigError -> 400
        sid = state.initiate(body.msisdn, body.gsm)
        return {"session_id": sid}

    @app.get("/auth/status/{session_id}")
    def auth_status(session_id: str) -> dict:
        state.sweep()
        auth = state.world.auth
        session = auth.get_session(session_id)
        if session.state.value == "VERIFIED":
            state.sleep_model_ms(
                sample_token_latency_ms(state.clock.stream("api-token")))
            auth.complete_auth(session_id)
            session = auth.get_session(session_id)
        out = {"state": session.state.value,
               "push_delivered": state.push_ready(session_id)}
        token = auth.pop_token_for_delivery(session_id)
        if token is not None:
            out["token"] = token
        return out

    @app.get("/ussd/screen/{msisdn}")
    def ussd_screen(msisdn: str) -> dict:
        state.sweep()
        if not state.world.mno.has_sim(msisdn):
            raise ApiError(404, "UnknownMsisdn", f"no SIM for {msisdn}")
        sess = state.world.gateway.current_for_msisdn(msisdn)
        if sess is None or not state.push_ready(sess.auth_session_ref):
            return {"available": False}
        return {"available": True, "ussd_session_id": sess.ussd_session_id,
                "screen_text": sess.text, "closed": sess.closed}

    @app.post("/ussd/respond")
    def ussd_respond(body: RespondBody) -> dict:
        state.sweep()
        gateway = state.world.gateway
        gsm = gsm_profile(state.gsm_name)
        sess = gateway.submit_input(body.ussd_session_id, body.input)
        # One signaling round trip, felt for real.
        state.sleep_model_ms(
            sample_verify_latency_ms(gsm, state.clock.stream("api-gsm")))
        return {"screen_text": sess.text, "closed": sess.closed}

    @app.post("/sso/login")
    def sso_login(body: SsoBody) -> dict:
        state.sweep()
        prof = profile(state.profile_name)
        cursor = TimeCursor(state.clock, advance_clock=False)
        try:
            outcome, token = state.world.sso.sso_login(
                body.email, body.password, prof, cursor, otp_code=body.otp)
        except UnknownUser:
            # same answer as a wrong password; do not leak enrolment
            raise ApiError(401, "BadCredentials", "email or password rejected")
        state.sleep_model_ms(cursor.elapsed_ms)
        if outcome.success:
            return {"token": token, "auth_time_s": round(outcome.auth_time_s, 3)}
        reason = outcome.failure_reason.value if outcome.failure_reason else "Other"
        if reason == "NetworkDrop":
            raise ApiError(503, "NetworkDrop", "connection lost during login")
        raise ApiError(401, reason, "email or password rejected")

    @app.get("/service/{name}")
    def service(name: str, authorization: Optional[str] = Header(None)) -> dict:
        state.sweep()
        if not authorization or not authorization.startswith("Bearer "):
            raise ApiError(401, "MissingToken", "Authorization: Bearer required",
                           extra={"reason": "MissingToken"})
        token = authorization[len("Bearer "):].strip()
        claims = parse_token(token)
        if claims is not None and str(claims.get("sid", "")).startswith("ws-"):
            result = state.world.sso.validate_web_token(token)
            method = "sso"
        else:
            result = state.world.auth.grant_resource(token)
            method = "mma"
        if isinstance(result, Reject):
            raise ApiError(401, result.reason.value, "token rejected",
                           extra={"reason": result.reason.value})
        assert isinstance(result, Accept)
        return {"granted": True, "service": name, "method": method,
                "user": result.user_id}

    @app.post("/sim/swap")
    def sim_swap(body: SwapBody) -> dict:
        state.sweep()
        card = state.world.mno.sim_swap(body.msisdn)
        return {"msisdn": body.msisdn, "swap_epoch": card.swap_epoch}

    @app.post("/net/profile")
    def net_profile(body: NetBody) -> dict:
        if body.profile is not None:
            profile(body.profile)
            state.profile_name = body.profile
        if body.gsm is not None:
            gsm_profile(body.gsm)
            state.gsm_name = body.gsm
        return {"profile": state.profile_name, "gsm": state.gsm_name}

    return app
