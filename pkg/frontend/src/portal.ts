/** Portal-side login state machine. Owns the session token: it is held
 * in a private field, sent back out only as an Authorization header,
 * and exposed to the UI purely as decoded public claims. */

import { ApiClient, ApiError, ServiceReply } from "./api.js";
import { Poller, POLL_INTERVAL_MS } from "./poll.js";
import { decodeClaims, PublicClaims } from "./token.js";

export type PortalPhase =
  | "idle"
  | "pushing"
  | "waiting"
  | "authenticated"
  | "granted"
  | "denied"
  | "locked"
  | "expired"
  | "network"
  | "rate_limited"
  | "bad_credentials";

export interface PortalError {
  code: string;
  message: string;
  reason?: string;
}

const TERMINAL: Record<string, PortalPhase> = {
  ACTIVE: "authenticated",
  DENIED: "denied",
  LOCKED_OUT: "locked",
  EXPIRED: "expired",
  FAILED_NETWORK: "network",
};

export class Portal {
  phase: PortalPhase = "idle";
  service = "passport";
  method: "mma" | "sso" | null = null;
  backendState: string | null = null;
  lastError: PortalError | null = null;
  grant: ServiceReply | null = null;

  private token: string | null = null;
  private sessionId: string | null = null;
  private readonly poller: Poller;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => undefined,
    intervalMs: number = POLL_INTERVAL_MS,
  ) {
    this.poller = new Poller(() => this.pollStatus(), intervalMs);
  }

  get polling(): boolean {
    return this.poller.running;
  }

  claims(): PublicClaims | null {
    return this.token === null ? null : decodeClaims(this.token);
  }

  reset(): void {
    this.poller.stop();
    this.phase = "idle";
    this.method = null;
    this.backendState = null;
    this.lastError = null;
    this.grant = null;
    this.token = null;
    this.sessionId = null;
    this.onChange();
  }

  async loginMma(msisdn: string, service: string): Promise<void> {
    this.reset();
    this.service = service;
    this.method = "mma";
    this.phase = "pushing";
    this.onChange();
    try {
      const reply = await this.api.initiate(msisdn);
      this.sessionId = reply.session_id;
      this.phase = "waiting";
      this.poller.start();
    } catch (err) {
      this.fail(err);
    }
    this.onChange();
  }

  async loginSso(email: string, password: string, service: string, otp?: string): Promise<void> {
    this.reset();
    this.service = service;
    this.method = "sso";
    this.phase = "pushing";
    this.onChange();
    try {
      const reply = await this.api.ssoLogin(email, password, otp);
      this.token = reply.token;
      this.phase = "authenticated";
    } catch (err) {
      this.fail(err);
    }
    this.onChange();
  }

  async openService(): Promise<void> {
    if (this.token === null) return;
    try {
      this.grant = await this.api.service(this.service, this.token);
      this.phase = "granted";
    } catch (err) {
      this.fail(err);
    }
    this.onChange();
  }

  private async pollStatus(): Promise<void> {
    if (this.sessionId === null) return;
    let reply;
    try {
      reply = await this.api.status(this.sessionId);
    } catch (err) {
      this.fail(err);
      this.onChange();
      return;
    }
    this.backendState = reply.state;
    if (reply.token !== undefined) {
      // delivered exactly once, on the TOKEN_ISSUED poll
      this.token = reply.token;
    }
    const phase = TERMINAL[reply.state];
    if (phase !== undefined) {
      this.poller.stop();
      this.phase = phase;
    } else if (this.token !== null) {
      // the backend only reports ACTIVE after the first grant, so a
      // held token is the sign-in signal
      this.poller.stop();
      this.phase = "authenticated";
    }
    this.onChange();
  }

  private fail(err: unknown): void {
    this.poller.stop();
    if (err instanceof ApiError) {
      this.lastError = { code: err.code, message: err.message, reason: err.reason };
      if (err.status === 429) this.phase = "rate_limited";
      else if (err.status === 401 && this.method === "sso") this.phase = "bad_credentials";
      else if (err.status === 401) this.phase = "denied";
      else this.phase = "network";
    } else {
      this.lastError = { code: "Error", message: String(err) };
      this.phase = "network";
    }
  }
}
