/** Virtual handset. Shows whatever screen text the gateway pushed,
 * byte for byte; the only inputs it can produce are keypad digits.
 * No menu logic lives here, so portal and handset cannot disagree. */

import { ApiClient } from "./api.js";
import { Poller, POLL_INTERVAL_MS } from "./poll.js";

export interface Dialog {
  sessionId: string;
  text: string;
  closed: boolean;
}

export class Handset {
  msisdn: string | null = null;
  dialog: Dialog | null = null;
  buffer = "";

  private readonly poller: Poller;
  // bumped whenever the dialog changes outside the poll loop, so an
  // in-flight poll cannot overwrite a fresher respond reply
  private epoch = 0;
  // the gateway reports no screen while it is processing our input;
  // polls landing in that window must not blank the dialog
  private sending = false;

  constructor(
    private readonly api: ApiClient,
    private readonly onChange: () => void = () => undefined,
    intervalMs: number = POLL_INTERVAL_MS,
  ) {
    this.poller = new Poller(() => this.pollScreen(), intervalMs);
  }

  get polling(): boolean {
    return this.poller.running;
  }

  register(msisdn: string): void {
    this.msisdn = msisdn;
    this.dialog = null;
    this.buffer = "";
    this.epoch += 1;
    this.poller.start();
    this.onChange();
  }

  unregister(): void {
    this.poller.stop();
    this.msisdn = null;
    this.dialog = null;
    this.buffer = "";
    this.epoch += 1;
    this.onChange();
  }

  key(digit: string): void {
    if (!/^[0-9*#]$/.test(digit)) return;
    if (this.dialog === null || this.dialog.closed) return;
    this.buffer += digit;
    this.onChange();
  }

  clear(): void {
    this.buffer = "";
    this.onChange();
  }

  async send(): Promise<void> {
    if (this.dialog === null || this.dialog.closed) return;
    const sessionId = this.dialog.sessionId;
    const input = this.buffer;
    this.buffer = "";
    this.sending = true;
    try {
      const reply = await this.api.respond(sessionId, input);
      this.epoch += 1;
      this.dialog = { sessionId, text: reply.screen_text, closed: reply.closed };
    } catch {
      // dialog vanished server-side; the next poll settles it
    } finally {
      this.sending = false;
    }
    this.onChange();
  }

  private async pollScreen(): Promise<void> {
    if (this.msisdn === null) return;
    const before = this.epoch;
    const reply = await this.api.screen(this.msisdn);
    if (this.epoch !== before || this.sending) return;
    if (reply.available) {
      const replaced = this.dialog === null || this.dialog.sessionId !== reply.ussd_session_id;
      if (replaced) this.buffer = "";
      this.dialog = {
        sessionId: reply.ussd_session_id,
        text: reply.screen_text,
        closed: reply.closed,
      };
    } else if (this.dialog !== null && !this.dialog.closed) {
      // the open dialog was dropped server-side; a closed one stays
      // on screen so its final message can be read
      this.dialog = null;
      this.buffer = "";
    }
    this.onChange();
  }
}
