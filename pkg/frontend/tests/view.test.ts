import { afterEach, beforeEach, describe, expect, it, vi } from "vitest";
import { ApiClient } from "../src/api.js";
import { setLocale, t } from "../src/i18n.js";
import { AppView } from "../src/view.js";

function b64url(text: string): string {
  return btoa(text).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

const TOKEN = `${b64url('{"alg":"HS256"}')}.${b64url(
  '{"sub":"amina","sid":"mm-1","exp":1766400900}',
)}.${b64url("c2lnbmF0dXJl")}`;

type Screen =
  | { available: false }
  | { available: true; ussd_session_id: string; screen_text: string; closed: boolean };

class FakeLab {
  screen: Screen = { available: false };
  statusSteps: Array<{ state: string; token?: string }> = [{ state: "INITIATED" }];

  readonly fetch = async (url: string, init?: RequestInit) => {
    const path = new URL(url).pathname;
    const ok = (body: unknown, status = 200) => ({
      ok: true, status, json: async () => body,
    });
    if (path === "/auth/initiate") return ok({ session_id: "mm-1" }, 202);
    if (path.startsWith("/auth/status/")) {
      const step =
        this.statusSteps.length > 1 ? this.statusSteps.shift() : this.statusSteps[0];
      return ok(step ?? { state: "INITIATED" });
    }
    if (path.startsWith("/ussd/screen/")) return ok(this.screen);
    if (path === "/ussd/respond") {
      void init;
      return ok({ screen_text: "Thank you", closed: true });
    }
    if (path.startsWith("/service/")) {
      return ok({ granted: true, service: path.slice("/service/".length), method: "mma", user: "amina" });
    }
    if (path === "/net/profile") return ok({ profile: "poor", gsm: "stable" });
    if (path === "/sim/swap") return ok({ swapped: true });
    return { ok: false, status: 404, json: async () => ({ code: "NotFound", message: path }) };
  };
}

function mount(lab: FakeLab): { view: AppView; root: HTMLElement } {
  document.body.innerHTML = '<div id="app"></div>';
  const root = document.getElementById("app") as HTMLElement;
  const api = new ApiClient("http://lab:8000", lab.fetch);
  return { view: new AppView(root, api), root };
}

function button(root: HTMLElement, label: string): HTMLButtonElement {
  const match = Array.from(root.querySelectorAll("button")).find(
    (b) => b.textContent === label,
  );
  if (match === undefined) throw new Error(`no button labelled ${label}`);
  return match;
}

describe("AppView", () => {
  beforeEach(() => {
    vi.useFakeTimers();
    setLocale("en");
  });
  afterEach(() => {
    vi.useRealTimers();
    document.body.innerHTML = "";
  });

  it("renders pushed screen text literally, markup included", async () => {
    const lab = new FakeLab();
    const { root } = mount(lab);
    const screen = root.querySelector(".screen") as HTMLElement;
    expect(screen.textContent).toBe(t("handset_idle"));

    lab.screen = {
      available: true,
      ussd_session_id: "ussd-1",
      screen_text: "Line one\nLine <b>two</b> & three",
      closed: false,
    };
    await vi.advanceTimersByTimeAsync(500);
    expect(screen.textContent).toBe("Line one\nLine <b>two</b> & three");
    expect(screen.querySelector("b")).toBeNull();
  });

  it("keeps the keypad locked unless an open dialog is on screen", async () => {
    const lab = new FakeLab();
    const { root } = mount(lab);
    const keys = Array.from(root.querySelectorAll<HTMLButtonElement>(".keypad button"));
    expect(keys.length).toBe(12);
    expect(keys.every((k) => k.disabled)).toBe(true);

    lab.screen = {
      available: true, ussd_session_id: "ussd-1", screen_text: "Enter PIN:", closed: false,
    };
    await vi.advanceTimersByTimeAsync(500);
    expect(keys.every((k) => !k.disabled)).toBe(true);

    lab.screen = {
      available: true, ussd_session_id: "ussd-1", screen_text: "Access denied.", closed: true,
    };
    await vi.advanceTimersByTimeAsync(500);
    expect(keys.every((k) => k.disabled)).toBe(true);
    expect(root.querySelector(".closed")?.textContent).toBe(t("handset_closed"));
  });

  it("shows decoded claims but never the token itself", async () => {
    const lab = new FakeLab();
    lab.statusSteps = [
      { state: "PIN_PENDING" },
      { state: "TOKEN_ISSUED", token: TOKEN },
      { state: "ACTIVE" },
    ];
    const { root, view } = mount(lab);
    button(root, t("login_mma")).click();
    await vi.advanceTimersByTimeAsync(1500);
    expect(view.portal.phase).toBe("authenticated");

    const html = document.body.innerHTML;
    expect(html).not.toContain(TOKEN);
    for (const segment of TOKEN.split(".")) {
      expect(html).not.toContain(segment);
    }
    expect(root.querySelector(".debug")?.textContent).toContain("amina");
    expect(root.querySelector(".debug")?.textContent).toContain("1766400900");

    button(root, t("open_service")).click();
    await vi.advanceTimersByTimeAsync(0);
    expect(view.portal.phase).toBe("granted");
    expect(root.querySelector(".grant")?.textContent).toContain("passport");
    expect(document.body.innerHTML).not.toContain(TOKEN);
  });

  it("reports a denial and offers a retry", async () => {
    const lab = new FakeLab();
    lab.statusSteps = [{ state: "DENIED" }];
    const { root, view } = mount(lab);
    button(root, t("login_mma")).click();
    await vi.advanceTimersByTimeAsync(500);
    expect(view.portal.phase).toBe("denied");
    expect(root.querySelector(".status")?.textContent).toBe(t("status_denied"));

    const retry = button(root, t("retry"));
    expect(retry.hidden).toBe(false);
    retry.click();
    expect(view.portal.phase).toBe("idle");
    expect(root.querySelector(".status")?.textContent).toBe(t("status_idle"));
  });

  it("relabels the chrome when the locale changes", () => {
    const lab = new FakeLab();
    const { root } = mount(lab);
    const heading = root.querySelector("h1") as HTMLElement;
    expect(heading.textContent).toBe("e-Government services demo");

    const select = root.querySelector("header select") as HTMLSelectElement;
    select.value = "sw";
    select.dispatchEvent(new Event("change"));
    expect(heading.textContent).toBe("Onyesho la huduma za serikali mtandaoni");
    expect(root.querySelector(".status")?.textContent).not.toBe("Not signed in");
  });
});
