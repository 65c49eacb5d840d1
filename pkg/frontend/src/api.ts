/** Thin JSON client for the lab's HTTP facade. All coupling to the
 * backend lives here: paths, bodies, and the error envelope. */

export interface HealthInfo {
  status: string;
  mode: string;
  scale: number;
  seed: number;
  profile: string;
  gsm: string;
}

export interface InitiateReply {
  session_id: string;
}

export interface StatusReply {
  state: string;
  token?: string;
}

export type ScreenReply =
  | { available: false }
  | { available: true; ussd_session_id: string; screen_text: string; closed: boolean };

export interface RespondReply {
  screen_text: string;
  closed: boolean;
}

export interface SsoReply {
  token: string;
  auth_time_s: number;
}

export interface ServiceReply {
  granted: boolean;
  service: string;
  method: string;
  user: string;
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    public readonly code: string,
    message: string,
    public readonly reason?: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

type FetchLike = (
  url: string,
  init?: RequestInit,
) => Promise<{ ok: boolean; status: number; json(): Promise<unknown> }>;

export class ApiClient {
  constructor(
    public readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (...args) => fetch(...args),
  ) {}

  health(): Promise<HealthInfo> {
    return this.request("GET", "/health");
  }

  initiate(msisdn: string, profile?: string, gsm?: string): Promise<InitiateReply> {
    return this.request("POST", "/auth/initiate", { msisdn, profile, gsm });
  }

  status(sessionId: string): Promise<StatusReply> {
    return this.request("GET", `/auth/status/${encodeURIComponent(sessionId)}`);
  }

  screen(msisdn: string): Promise<ScreenReply> {
    return this.request("GET", `/ussd/screen/${encodeURIComponent(msisdn)}`);
  }

  respond(ussdSessionId: string, input: string): Promise<RespondReply> {
    return this.request("POST", "/ussd/respond", {
      ussd_session_id: ussdSessionId,
      input,
    });
  }

  ssoLogin(email: string, password: string, otp?: string): Promise<SsoReply> {
    return this.request("POST", "/sso/login", { email, password, otp });
  }

  service(name: string, token: string): Promise<ServiceReply> {
    return this.request("GET", `/service/${encodeURIComponent(name)}`, undefined, token);
  }

  simSwap(msisdn: string): Promise<unknown> {
    return this.request("POST", "/sim/swap", { msisdn });
  }

  netProfile(profile?: string, gsm?: string): Promise<unknown> {
    return this.request("POST", "/net/profile", { profile, gsm });
  }

  private async request<T>(
    method: string,
    path: string,
    body?: Record<string, unknown>,
    bearer?: string,
  ): Promise<T> {
    const headers: Record<string, string> = {};
    const init: RequestInit = { method, headers };
    if (body !== undefined) {
      headers["Content-Type"] = "application/json";
      init.body = JSON.stringify(body);
    }
    if (bearer !== undefined) {
      headers["Authorization"] = `Bearer ${bearer}`;
    }
    let res;
    try {
      res = await this.fetchFn(this.baseUrl + path, init);
    } catch (err) {
      throw new ApiError(0, "Unreachable", String(err));
    }
    let payload: unknown = null;
    try {
      payload = await res.json();
    } catch {
      // non-JSON body; the envelope below fills in generic fields
    }
    if (!res.ok) {
      const p = (payload ?? {}) as Record<string, unknown>;
      throw new ApiError(
        res.status,
        typeof p.code === "string" ? p.code : "Error",
        typeof p.message === "string" ? p.message : `HTTP ${res.status}`,
        typeof p.reason === "string" ? p.reason : undefined,
      );
    }
    return payload as T;
  }
}
