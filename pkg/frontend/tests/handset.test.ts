import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { Handset } from "../src/handset.js";

type Screen =
  | { available: false }
  | { available: true; ussd_session_id: string; screen_text: string; closed: boolean };

class FakeGateway {
  screen: Screen = { available: false };
  respondReply = { screen_text: "Thank you", closed: true };
  respondCalls: Array<{ ussd_session_id: string; input: string }> = [];

  readonly fetch = async (url: string, init?: RequestInit) => {
    const path = new URL(url).pathname;
    if (path.startsWith("/ussd/screen/")) {
      return { ok: true, status: 200, json: async () => this.screen };
    }
    if (path === "/ussd/respond") {
      this.respondCalls.push(JSON.parse(String(init?.body)));
      return { ok: true, status: 200, json: async () => this.respondReply };
    }
    return { ok: false, status: 404, json: async () => ({ code: "NotFound", message: path }) };
  };
}

function makeHandset(gateway: FakeGateway) {
  const api = new ApiClient("http://lab:8000", gateway.fetch);
  return new Handset(api, () => undefined);
}

const PUSH: Screen = {
  available: true,
  ussd_session_id: "ussd-1",
  screen_text: "GovAuth\n1. Approve login\n2. Deny",
  closed: false,
};

describe("Handset", () => {
  beforeEach(() => vi.useFakeTimers());
  afterEach(() => vi.useRealTimers());

  it("shows a pushed screen exactly as sent", async () => {
    const gateway = new FakeGateway();
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    expect(handset.dialog).toBeNull();

    gateway.screen = PUSH;
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog?.text).toBe("GovAuth\n1. Approve login\n2. Deny");
    expect(handset.dialog?.closed).toBe(false);
    handset.unregister();
  });

  it("accepts keypad digits only and sends the buffer", async () => {
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    gateway.respondReply = { screen_text: "Enter PIN:", closed: false };
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);

    for (const key of ["1", "a", "!", "٣", " "]) handset.key(key);
    expect(handset.buffer).toBe("1");
    handset.clear();
    for (const key of ["1", "2", "3", "4"]) handset.key(key);
    expect(handset.buffer).toBe("1234");

    await handset.send();
    expect(gateway.respondCalls).toEqual([{ ussd_session_id: "ussd-1", input: "1234" }]);
    expect(handset.buffer).toBe("");
    expect(handset.dialog?.text).toBe("Enter PIN:");
    handset.unregister();
  });

  it("locks input once the dialog closes", async () => {
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);

    handset.key("1");
    await handset.send();
    expect(handset.dialog?.closed).toBe(true);
    handset.key("5");
    expect(handset.buffer).toBe("");
    await handset.send();
    expect(gateway.respondCalls).toHaveLength(1);
    handset.unregister();
  });

  it("replaces the dialog when a new push arrives", async () => {
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);
    handset.key("1");

    gateway.screen = {
      available: true, ussd_session_id: "ussd-2", screen_text: "Enter PIN:", closed: false,
    };
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog?.sessionId).toBe("ussd-2");
    expect(handset.buffer).toBe("");
    handset.unregister();
  });

  it("drops an open dialog the server no longer knows", async () => {
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog).not.toBeNull();

    gateway.screen = { available: false };
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog).toBeNull();
    handset.unregister();
  });

  it("ignores a stale poll that raced a closing respond", async () => {
    // snapshot semantics: a screen response carries the state at the
    // moment the request went out, however late it resolves
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    gateway.respondReply = { screen_text: "PIN locked.", closed: true };
    const pending: Array<{ snapshot: Screen; resolve: (r: unknown) => void }> = [];
    const directFetch = gateway.fetch;
    const api = new ApiClient("http://lab:8000", async (url, init) => {
      if (new URL(url).pathname.startsWith("/ussd/screen/")) {
        return new Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>(
          (resolve) => {
            pending.push({ snapshot: gateway.screen, resolve: resolve as (r: unknown) => void });
          },
        );
      }
      return directFetch(url, init);
    });
    const handset = new Handset(api, () => undefined);
    const release = () => {
      const req = pending.shift();
      if (req === undefined) throw new Error("no pending screen request");
      req.resolve({ ok: true, status: 200, json: async () => req.snapshot });
    };

    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);
    release();
    await vi.advanceTimersByTimeAsync(0);
    expect(handset.dialog?.closed).toBe(false);

    await vi.advanceTimersByTimeAsync(500);  // poll in flight, open snapshot
    handset.key("1");
    await handset.send();
    expect(handset.dialog?.text).toBe("PIN locked.");
    expect(handset.dialog?.closed).toBe(true);

    release();  // stale open screen resolves after the respond
    await vi.advanceTimersByTimeAsync(0);
    expect(handset.dialog?.text).toBe("PIN locked.");
    expect(handset.dialog?.closed).toBe(true);

    gateway.screen = { available: false };
    await vi.advanceTimersByTimeAsync(500);
    release();
    await vi.advanceTimersByTimeAsync(0);
    expect(handset.dialog?.text).toBe("PIN locked.");
    handset.unregister();
  });

  it("holds the dialog while a slow respond is processing", async () => {
    // while the gateway chews on our input it reports no screen for
    // the number; the final reply still must land on the dialog
    const gateway = new FakeGateway();
    gateway.screen = PUSH;
    let releaseRespond: () => void = () => undefined;
    const directFetch = gateway.fetch;
    const api = new ApiClient("http://lab:8000", async (url, init) => {
      if (new URL(url).pathname === "/ussd/respond") {
        await new Promise<void>((resolve) => {
          releaseRespond = resolve;
        });
        return {
          ok: true,
          status: 200,
          json: async () => ({ screen_text: "PIN locked.", closed: true }),
        };
      }
      return directFetch(url, init);
    });
    const handset = new Handset(api, () => undefined);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog?.closed).toBe(false);

    handset.key("1");
    const sendDone = handset.send();
    gateway.screen = { available: false };
    await vi.advanceTimersByTimeAsync(1000);
    expect(handset.dialog?.closed).toBe(false);

    releaseRespond();
    await sendDone;
    expect(handset.dialog?.text).toBe("PIN locked.");
    expect(handset.dialog?.closed).toBe(true);

    await vi.advanceTimersByTimeAsync(1000);
    expect(handset.dialog?.text).toBe("PIN locked.");
    handset.unregister();
  });

  it("keeps a closed screen visible after the gateway forgets it", async () => {
    const gateway = new FakeGateway();
    gateway.screen = {
      available: true, ussd_session_id: "ussd-3", screen_text: "Access denied.", closed: true,
    };
    const handset = makeHandset(gateway);
    handset.register("+254700000001");
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog?.closed).toBe(true);

    gateway.screen = { available: false };
    await vi.advanceTimersByTimeAsync(500);
    expect(handset.dialog?.text).toBe("Access denied.");
    handset.unregister();
  });
});
