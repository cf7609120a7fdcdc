import { ApiClient } from "./api.js";
import { el } from "./dom.js";
import { navigate, onRouteChange } from "./router.js";
import { clearSession, sessionRole, sessionToken } from "./session.js";
import { renderAdmin } from "./views/admin.js";
import { renderChat } from "./views/chat.js";
import { renderLectures } from "./views/lectures.js";
import { renderLogin } from "./views/login.js";
import { renderRegister } from "./views/register.js";
import { renderResults } from "./views/results.js";

declare global {
  interface Window {
    SATEP_API_BASE?: string;
  }
}

const api = new ApiClient({
  baseUrl: window.SATEP_API_BASE ?? "",
  getToken: sessionToken,
  onUnauthorized: () => {
    // the session died server-side; drop it and land on the login page
    clearSession();
    navigate("login");
  },
});

function renderNav(nav: HTMLElement): void {
  const role = sessionRole();
  const links: [string, string][] = [["home", "Lectures"]];
  if (role === "user") links.push(["results", "My results"]);
  if (role === "admin") links.push(["admin", "Administration"]);
  if (role !== "guest") links.push(["chat", "Chat"]);
  nav.replaceChildren(...links.map(([route, label]) =>
    el("a", { href: `#/${route}` }, label)));
  if (role === "guest") {
    nav.append(el("a", { href: "#/login" }, "Log in"));
  } else {
    const logout = el("a", { href: "#/login" }, "Log out");
    logout.addEventListener("click", () => {
      void api.logout().catch(() => undefined);
      clearSession();
    });
    nav.append(logout);
  }
}

export function boot(): void {
  const nav = document.querySelector<HTMLElement>("nav");
  const main = document.querySelector<HTMLElement>("main");
  if (!nav || !main) throw new Error("index.html is missing nav/main mounts");

  let teardown: (() => void) | null = null;
  onRouteChange((route) => {
    teardown?.();
    teardown = null;
    renderNav(nav);
    const role = sessionRole();
    switch (route.name) {
      case "login":
        renderLogin(main, api);
        break;
      case "register":
        renderRegister(main, api);
        break;
      case "results":
        renderResults(main, api);
        break;
      case "chat": {
        const chat = renderChat(main, api);
        teardown = chat.stop;
        break;
      }
      case "admin":
        if (role === "admin") renderAdmin(main, api);
        else renderLogin(main, api);
        break;
      default:
        if (role === "guest") renderLogin(main, api);
        else renderLectures(main, api);
    }
  });
}

boot();
