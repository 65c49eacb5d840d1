/** DOM wiring for the two panes and the impairment controls. Built
 * once; render() only touches text, values, and visibility so inputs
 * keep focus across the 500ms poll ticks. */

import { ApiClient } from "./api.js";
import { Chaos, GSM_PROFILES, NET_PROFILES } from "./chaos.js";
import { Handset } from "./handset.js";
import { getLocale, LOCALES, LocaleCode, MsgKey, setLocale, t } from "./i18n.js";
import { Portal, PortalPhase } from "./portal.js";

const STATUS_KEY: Record<PortalPhase, MsgKey> = {
  idle: "status_idle",
  pushing: "status_pushing",
  waiting: "status_waiting",
  authenticated: "status_authenticated",
  granted: "status_granted",
  denied: "status_denied",
  locked: "status_locked",
  expired: "status_expired",
  network: "status_network",
  rate_limited: "status_rate_limited",
  bad_credentials: "status_bad_credentials",
};

const RETRYABLE: PortalPhase[] = [
  "denied", "locked", "expired", "network", "rate_limited", "bad_credentials",
];

const SERVICES: Array<[string, MsgKey]> = [
  ["passport", "service_passport"],
  ["business-registration", "service_business"],
  ["taxes", "service_taxes"],
];

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  ...children: Array<Node | string>
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  node.append(...children);
  return node;
}

export class AppView {
  readonly portal: Portal;
  readonly handset: Handset;
  readonly chaos: Chaos;

  private readonly labels: Array<[HTMLElement, MsgKey]> = [];
  private readonly msisdnInput = el("input");
  private readonly emailInput = el("input");
  private readonly passwordInput = el("input");
  private readonly otpInput = el("input");
  private readonly serviceSelect = el("select");
  private readonly localeSelect = el("select");
  private readonly netSelect = el("select");
  private readonly gsmSelect = el("select");
  private readonly statusText = el("strong", "status");
  private readonly errorText = el("small", "error");
  private readonly grantBox = el("div", "grant");
  private readonly openBtn = el("button");
  private readonly retryBtn = el("button");
  private readonly debugState = el("td");
  private readonly debugSub = el("td");
  private readonly debugExp = el("td");
  private readonly screenText = el("div", "screen");
  private readonly closedBadge = el("div", "closed");
  private readonly bufferLine = el("div", "buffer");
  private readonly keypadButtons: HTMLButtonElement[] = [];
  private readonly sendBtn = el("button", "send");
  private readonly clearBtn = el("button");
  private readonly swapNote = el("small");

  constructor(root: HTMLElement, api: ApiClient) {
    const rerender = () => this.render();
    this.portal = new Portal(api, rerender);
    this.handset = new Handset(api, rerender);
    this.chaos = new Chaos(api, rerender);
    root.append(this.buildHeader(), el("main", "panes",
      this.buildPortalPane(), this.buildHandsetPane(), this.buildChaosPane()));
    this.handset.register(this.msisdnInput.value);
    this.render();
  }

  private label(tag: "h1" | "h2" | "span" | "button" | "summary" | "option" | "th", key: MsgKey): HTMLElement {
    const node = document.createElement(tag);
    this.labels.push([node, key]);
    return node;
  }

  private buildHeader(): HTMLElement {
    for (const code of LOCALES) {
      const opt = el("option", undefined, code.toUpperCase());
      opt.value = code;
      this.localeSelect.append(opt);
    }
    this.localeSelect.value = getLocale();
    this.localeSelect.addEventListener("change", () => {
      setLocale(this.localeSelect.value as LocaleCode);
      this.render();
    });
    return el("header", undefined,
      this.label("h1", "app_title"),
      el("label", "locale", this.label("span", "language_label"), this.localeSelect));
  }

  private buildPortalPane(): HTMLElement {
    for (const [value, key] of SERVICES) {
      const opt = this.label("option", key) as HTMLOptionElement;
      opt.value = value;
      this.serviceSelect.append(opt);
    }
    this.msisdnInput.value = "+254700000001";
    this.emailInput.value = "citizen@example.com";
    this.passwordInput.type = "password";
    this.passwordInput.value = "correct-horse-battery";
    this.otpInput.autocomplete = "off";

    const mmaBtn = this.label("button", "login_mma");
    mmaBtn.addEventListener("click", () => {
      const msisdn = this.msisdnInput.value.trim();
      this.handset.register(msisdn);
      void this.portal.loginMma(msisdn, this.serviceSelect.value);
    });
    const ssoBtn = this.label("button", "login_sso");
    ssoBtn.addEventListener("click", () => {
      void this.portal.loginSso(
        this.emailInput.value.trim(),
        this.passwordInput.value,
        this.serviceSelect.value,
        this.otpInput.value.trim() || undefined);
    });
    this.openBtn.addEventListener("click", () => void this.portal.openService());
    this.labels.push([this.openBtn, "open_service"]);
    this.retryBtn.addEventListener("click", () => this.portal.reset());
    this.labels.push([this.retryBtn, "retry"]);

    const debug = el("details", "debug",
      this.label("summary", "debug_heading"),
      el("table", undefined,
        el("tr", undefined, this.label("th", "debug_state"), this.debugState),
        el("tr", undefined, this.label("th", "debug_sub"), this.debugSub),
        el("tr", undefined, this.label("th", "debug_exp"), this.debugExp)));

    return el("section", "portal",
      this.label("h2", "portal_heading"),
      el("label", undefined, this.label("span", "service_label"), this.serviceSelect),
      el("label", undefined, this.label("span", "msisdn_label"), this.msisdnInput),
      el("div", "row", mmaBtn),
      el("label", undefined, this.label("span", "email_label"), this.emailInput),
      el("label", undefined, this.label("span", "password_label"), this.passwordInput),
      el("label", undefined, this.label("span", "otp_label"), this.otpInput),
      el("div", "row", ssoBtn),
      el("div", "statusline", this.statusText, this.errorText),
      el("div", "row", this.openBtn, this.retryBtn),
      this.grantBox,
      debug);
  }

  private buildHandsetPane(): HTMLElement {
    const keypad = el("div", "keypad");
    for (const digit of ["1", "2", "3", "4", "5", "6", "7", "8", "9", "*", "0", "#"]) {
      const btn = el("button", "key", digit);
      btn.addEventListener("click", () => this.handset.key(digit));
      this.keypadButtons.push(btn);
      keypad.append(btn);
    }
    this.sendBtn.addEventListener("click", () => void this.handset.send());
    this.labels.push([this.sendBtn, "keypad_send"]);
    this.clearBtn.addEventListener("click", () => this.handset.clear());
    this.labels.push([this.clearBtn, "keypad_clear"]);

    return el("section", "handset",
      this.label("h2", "handset_heading"),
      this.screenText,
      this.closedBadge,
      this.bufferLine,
      keypad,
      el("div", "row", this.sendBtn, this.clearBtn));
  }

  private buildChaosPane(): HTMLElement {
    for (const name of NET_PROFILES) {
      const opt = el("option", undefined, name);
      opt.value = name;
      this.netSelect.append(opt);
    }
    for (const name of GSM_PROFILES) {
      const opt = el("option", undefined, name);
      opt.value = name;
      this.gsmSelect.append(opt);
    }
    this.netSelect.addEventListener("change",
      () => void this.chaos.setProfile(this.netSelect.value));
    this.gsmSelect.addEventListener("change",
      () => void this.chaos.setGsm(this.gsmSelect.value));
    const swapBtn = this.label("button", "swap_button");
    swapBtn.addEventListener("click", () => {
      const msisdn = this.handset.msisdn ?? this.msisdnInput.value.trim();
      void this.chaos.simSwap(msisdn);
    });

    return el("section", "chaos",
      this.label("h2", "chaos_heading"),
      el("label", undefined, this.label("span", "net_label"), this.netSelect),
      el("label", undefined, this.label("span", "gsm_label"), this.gsmSelect),
      el("div", "row", swapBtn, this.swapNote));
  }

  render(): void {
    for (const [node, key] of this.labels) node.textContent = t(key);

    const p = this.portal;
    this.statusText.textContent = t(STATUS_KEY[p.phase]);
    this.errorText.textContent = p.lastError === null
      ? ""
      : `${p.lastError.code}${p.lastError.reason ? ` (${p.lastError.reason})` : ""}`;
    this.openBtn.hidden = p.phase !== "authenticated";
    this.retryBtn.hidden = !RETRYABLE.includes(p.phase);
    this.grantBox.hidden = p.grant === null;
    this.grantBox.textContent = p.grant === null
      ? ""
      : `${p.grant.service} / ${p.grant.method} / ${p.grant.user}`;

    const claims = p.claims();
    this.debugState.textContent = p.backendState ?? p.phase;
    this.debugSub.textContent = claims === null ? t("debug_no_token") : claims.sub;
    this.debugExp.textContent = claims === null ? "" : String(claims.exp);

    const dialog = this.handset.dialog;
    // screen_text is shown exactly as received; textContent keeps it literal
    this.screenText.textContent = dialog === null ? t("handset_idle") : dialog.text;
    this.screenText.classList.toggle("idle", dialog === null);
    this.closedBadge.hidden = dialog === null || !dialog.closed;
    this.closedBadge.textContent = this.closedBadge.hidden ? "" : t("handset_closed");
    this.bufferLine.textContent = this.handset.buffer;
    const inputLocked = dialog === null || dialog.closed;
    for (const btn of this.keypadButtons) btn.disabled = inputLocked;
    this.sendBtn.disabled = inputLocked;
    this.clearBtn.disabled = inputLocked;

    if (this.netSelect.value !== this.chaos.profile) this.netSelect.value = this.chaos.profile;
    if (this.gsmSelect.value !== this.chaos.gsm) this.gsmSelect.value = this.chaos.gsm;
    this.swapNote.textContent =
      this.chaos.swapCount === 0 ? "" : `${t("swap_done")} ×${this.chaos.swapCount}`;
  }
}
