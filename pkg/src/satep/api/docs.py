"""Render the endpoint reference straight from the live route table."""

from __future__ import annotations

from satep.api.app import ERROR_STATUS, ROUTES

_ROLE_LABEL = {
    "public": "none",
    "authenticated": "any session",
    "user": "user session",
    "admin": "admin session",
}


def render_api_reference() -> str:
    lines = [
        "# HTTP API reference",
        "",
        "Generated from the route table; regenerate with"
        " `python3 -m satep.api.docs > docs/api.md`.",
        "",
        "All endpoints sit under `/api`. Authentication is a bearer token from"
        " `POST /api/login`, sent as `Authorization: Bearer <token>`.",
        "",
        "Every response except the raw file download is wrapped in an envelope:"
        " `{\"ok\": true, \"data\": ...}` on success,"
        " `{\"ok\": false, \"error\": {\"code\", \"message\", \"http_status\"}}`"
        " on failure. Successful calls return HTTP 200.",
        "",
        "Request bodies are strict JSON: unknown fields are rejected with 422.",
        "",
        "## Endpoints",
        "",
        "| Method | Path | Requires | Description |",
        "| --- | --- | --- | --- |",
    ]
    for spec in sorted(ROUTES, key=lambda s: (s.path, s.method)):
        lines.append(
            f"| {spec.method} | `{spec.path}` | {_ROLE_LABEL[spec.auth]} | {spec.summary} |"
        )
    lines += [
        "",
        "## Error codes",
        "",
        "| Code | HTTP status |",
        "| --- | --- |",
    ]
    for code, status in sorted(ERROR_STATUS.items(), key=lambda kv: (kv[1], kv[0])):
        lines.append(f"| {code} | {status} |")
    lines.append("")
    return "\n".join(lines)


if __name__ == "__main__":
    print(render_api_reference(), end="")
