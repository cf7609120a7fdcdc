/** Hash router: "#/lectures/3" -> handler("lectures", ["3"]). */

export interface Route {
  name: string;
  args: string[];
}

export function parseHash(hash: string): Route {
  const path = hash.replace(/^#\/?/, "");
  if (!path) return { name: "home", args: [] };
  const segments = path.split("/").map(decodeURIComponent);
  const name = segments[0] ?? "home";
  return { name, args: segments.slice(1) };
}

export function navigate(path: string): void {
  window.location.hash = path.startsWith("#") ? path : `#/${path.replace(/^\//, "")}`;
}

export function onRouteChange(handler: (route: Route) => void): void {
  const fire = () => handler(parseHash(window.location.hash));
  window.addEventListener("hashchange", fire);
  fire();
}
