import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { Portal } from "../src/portal.js";

function b64url(text: string): string {
  return btoa(text).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

const TOKEN = `${b64url('{"alg":"HS256"}')}.${b64url(
  '{"sub":"amina","sid":"mm-1","exp":1766400900}',
)}.${b64url("sig")}`;

interface StatusStep {
  state: string;
  token?: string;
}

class FakeBackend {
  statusSteps: StatusStep[] = [];
  statusCalls = 0;
  initiateReply: { status: number; body: unknown } = {
    status: 202,
    body: { session_id: "mm-1" },
  };
  ssoReply: { status: number; body: unknown } = {
    status: 200,
    body: { token: TOKEN, auth_time_s: 13.2 },
  };
  serviceReply: { status: number; body: unknown } = {
    status: 200,
    body: { granted: true, service: "passport", method: "mma", user: "amina" },
  };
  lastAuthorization: string | null = null;

  readonly fetch = async (url: string, init?: RequestInit) => {
    const path = new URL(url).pathname;
    let reply: { status: number; body: unknown };
    if (path === "/auth/initiate") {
      reply = this.initiateReply;
    } else if (path.startsWith("/auth/status/")) {
      this.statusCalls += 1;
      const step = this.statusSteps.length > 1 ? this.statusSteps.shift() : this.statusSteps[0];
      reply = { status: 200, body: step ?? { state: "INITIATED" } };
    } else if (path === "/sso/login") {
      reply = this.ssoReply;
    } else if (path.startsWith("/service/")) {
      const headers = (init?.headers ?? {}) as Record<string, string>;
      this.lastAuthorization = headers["Authorization"] ?? null;
      reply = this.serviceReply;
    } else {
      reply = { status: 404, body: { code: "NotFound", message: path } };
    }
    return { ok: reply.status < 400, status: reply.status, json: async () => reply.body };
  };
}

function makePortal(backend: FakeBackend) {
  let changes = 0;
  const api = new ApiClient("http://lab:8000", backend.fetch);
  const portal = new Portal(api, () => {
    changes += 1;
  });
  return { portal, changeCount: () => changes };
}

describe("Portal", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("walks push, wait, token, grant on the happy path", async () => {
    const backend = new FakeBackend();
    backend.statusSteps = [
      { state: "USSD_PUSHED" },
      { state: "PIN_PENDING" },
      { state: "TOKEN_ISSUED", token: TOKEN },
    ];
    const { portal } = makePortal(backend);

    await portal.loginMma("+254700000001", "passport");
    expect(portal.phase).toBe("waiting");
    expect(portal.polling).toBe(true);
    expect(portal.claims()).toBeNull();

    await vi.advanceTimersByTimeAsync(1000);
    expect(portal.phase).toBe("waiting");
    expect(portal.backendState).toBe("PIN_PENDING");

    await vi.advanceTimersByTimeAsync(500);
    expect(portal.phase).toBe("authenticated");
    expect(portal.polling).toBe(false);
    expect(portal.claims()).toEqual({ sub: "amina", exp: 1766400900 });

    await portal.openService();
    expect(portal.phase).toBe("granted");
    expect(portal.grant?.user).toBe("amina");
    expect(backend.lastAuthorization).toBe(`Bearer ${TOKEN}`);
  });

  it("polls status every 500ms and not before", async () => {
    const backend = new FakeBackend();
    backend.statusSteps = [{ state: "PIN_PENDING" }];
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "taxes");
    expect(backend.statusCalls).toBe(0);
    await vi.advanceTimersByTimeAsync(499);
    expect(backend.statusCalls).toBe(0);
    await vi.advanceTimersByTimeAsync(1);
    expect(backend.statusCalls).toBe(1);
    await vi.advanceTimersByTimeAsync(500);
    expect(backend.statusCalls).toBe(2);
    portal.reset();
  });

  it("signs in on token delivery and stops polling", async () => {
    const backend = new FakeBackend();
    backend.statusSteps = [{ state: "TOKEN_ISSUED", token: TOKEN }];
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "passport");
    await vi.advanceTimersByTimeAsync(500);
    expect(portal.phase).toBe("authenticated");
    expect(portal.claims()?.sub).toBe("amina");
    expect(backend.statusCalls).toBe(1);
    await vi.advanceTimersByTimeAsync(1000);
    expect(backend.statusCalls).toBe(1);
  });

  it.each([
    ["DENIED", "denied"],
    ["LOCKED_OUT", "locked"],
    ["EXPIRED", "expired"],
    ["FAILED_NETWORK", "network"],
  ])("maps terminal state %s", async (backendState, phase) => {
    const backend = new FakeBackend();
    backend.statusSteps = [{ state: backendState }];
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "passport");
    await vi.advanceTimersByTimeAsync(500);
    expect(portal.phase).toBe(phase);
    expect(portal.polling).toBe(false);
    expect(portal.claims()).toBeNull();
  });

  it("resets cleanly for a retry", async () => {
    const backend = new FakeBackend();
    backend.statusSteps = [{ state: "DENIED" }];
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "passport");
    await vi.advanceTimersByTimeAsync(500);
    expect(portal.phase).toBe("denied");
    portal.reset();
    expect(portal.phase).toBe("idle");
    expect(portal.backendState).toBeNull();
    expect(portal.lastError).toBeNull();
  });

  it("reports a throttled initiate", async () => {
    const backend = new FakeBackend();
    backend.initiateReply = {
      status: 429,
      body: { code: "RateLimited", message: "slow down" },
    };
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "passport");
    expect(portal.phase).toBe("rate_limited");
    expect(portal.polling).toBe(false);
    expect(portal.lastError?.code).toBe("RateLimited");
  });

  it("authenticates over the password path without polling", async () => {
    const backend = new FakeBackend();
    const { portal } = makePortal(backend);
    await portal.loginSso("citizen@example.com", "correct-horse-battery", "taxes");
    expect(portal.phase).toBe("authenticated");
    expect(portal.polling).toBe(false);
    expect(portal.claims()?.sub).toBe("amina");
  });

  it("separates bad credentials from outages on the password path", async () => {
    const backend = new FakeBackend();
    backend.ssoReply = { status: 401, body: { code: "BadPassword", message: "no" } };
    const { portal } = makePortal(backend);
    await portal.loginSso("citizen@example.com", "wrong", "taxes");
    expect(portal.phase).toBe("bad_credentials");

    backend.ssoReply = { status: 503, body: { code: "NetworkDown", message: "later" } };
    await portal.loginSso("citizen@example.com", "correct-horse-battery", "taxes");
    expect(portal.phase).toBe("network");
  });

  it("treats a service-stage rejection as a denial with the reason kept", async () => {
    const backend = new FakeBackend();
    backend.statusSteps = [{ state: "TOKEN_ISSUED", token: TOKEN }, { state: "ACTIVE" }];
    backend.serviceReply = {
      status: 401,
      body: { code: "SimSwapDetected", message: "token rejected", reason: "SimSwapDetected" },
    };
    const { portal } = makePortal(backend);
    await portal.loginMma("+254700000001", "passport");
    await vi.advanceTimersByTimeAsync(1000);
    await portal.openService();
    expect(portal.phase).toBe("denied");
    expect(portal.lastError?.reason).toBe("SimSwapDetected");
  });
});
