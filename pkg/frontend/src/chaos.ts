/** Impairment controls: switch the backend's network profiles mid-flow
 * and trigger a SIM swap against the handset's number. */

import { ApiClient } from "./api.js";

export const NET_PROFILES = ["good", "moderate", "poor"] as const;
export const GSM_PROFILES = ["stable", "intermittent", "poor"] as const;

export class Chaos {
  profile = "good";
  gsm = "stable";
  swapCount = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => undefined,
  ) {}

  async sync(): Promise<void> {
    const h = await this.api.health();
    this.profile = h.profile;
    this.gsm = h.gsm;
    this.onChange();
  }

  async setProfile(profile: string): Promise<void> {
    await this.api.netProfile(profile, undefined);
    this.profile = profile;
    this.onChange();
  }

  async setGsm(gsm: string): Promise<void> {
    await this.api.netProfile(undefined, gsm);
    this.gsm = gsm;
    this.onChange();
  }

  async simSwap(msisdn: string): Promise<void> {
    await this.api.simSwap(msisdn);
    this.swapCount += 1;
    this.onChange();
  }
}
