/** Read-only peek at a token's public claims for the debug drawer.
 * The token value itself never leaves the portal state; only the
 * decoded subject and expiry are handed to render code. */

export interface PublicClaims {
  sub: string;
  exp: number;
}

function b64urlToText(segment: string): string | null {
  const padded = segment.replace(/-/g, "+").replace(/_/g, "/");
  try {
    return atob(padded + "=".repeat((4 - (padded.length % 4)) % 4));
  } catch {
    return null;
  }
}

export function decodeClaims(token: string): PublicClaims | null {
  const parts = token.split(".");
  if (parts.length !== 3 || parts[1] === undefined) return null;
  const text = b64urlToText(parts[1]);
  if (text === null) return null;
  let claims: unknown;
  try {
    claims = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof claims !== "object" || claims === null) return null;
  const c = claims as Record<string, unknown>;
  if (typeof c.sub !== "string" || typeof c.exp !== "number") return null;
  return { sub: c.sub, exp: c.exp };
}
