/** Session token and role, kept in sessionStorage so a tab close logs out. */

const TOKEN_KEY = "satep.token";
const KIND_KEY = "satep.kind";

export type Role = "guest" | "user" | "admin";

export function saveSession(token: string, kind: string): void {
  sessionStorage.setItem(TOKEN_KEY, token);
  sessionStorage.setItem(KIND_KEY, kind);
}

export function clearSession(): void {
  sessionStorage.removeItem(TOKEN_KEY);
  sessionStorage.removeItem(KIND_KEY);
}

export function sessionToken(): string | null {
  return sessionStorage.getItem(TOKEN_KEY);
}

export function sessionRole(): Role {
  if (!sessionToken()) return "guest";
  return sessionStorage.getItem(KIND_KEY) === "admin" ? "admin" : "user";
}
