"""Strict request parsing: unknown fields are client drift, not noise."""

from __future__ import annotations

import json
from typing import Any, Mapping

from starlette.requests import Request

from satep.errors import InvalidField, MalformedJson, MissingField, UnknownField

# Sentinel distinguishing "optional and absent" from an explicit null.
ABSENT = object()


async def read_json(request: Request) -> dict:
    raw = await request.body()
    if not raw:
        raise MalformedJson("request body must be a JSON object")
    try:
        payload = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedJson(f"body is not valid JSON: {exc.msg}") from None
    if not isinstance(payload, dict):
        raise MalformedJson("top-level JSON value must be an object")
    return payload


def _check_type(key: str, value: Any, expected) -> Any:
    if expected is Any:
        return value
    # bool is an int subclass; an int field must still refuse true/false
    if expected is int and isinstance(value, bool):
        raise InvalidField(f"{key} must be an integer")
    if not isinstance(value, expected):
        name = getattr(expected, "__name__", str(expected))
        raise InvalidField(f"{key} must be of type {name}")
    return value


def extract(
    payload: Mapping[str, Any],
    required: Mapping[str, type] | None = None,
    optional: Mapping[str, type] | None = None,
) -> dict:
    """Pull exactly the declared fields out of a parsed JSON object."""
    required = required or {}
    optional = optional or {}
    for key in payload:
        if key not in required and key not in optional:
            raise UnknownField(f"unexpected field {key!r}")
    values = {}
    for key, expected in required.items():
        if key not in payload:
            raise MissingField(f"missing required field {key!r}")
        values[key] = _check_type(key, payload[key], expected)
    for key, expected in optional.items():
        if key in payload and payload[key] is not None:
            values[key] = _check_type(key, payload[key], expected)
    return values


async def read_body(
    request: Request,
    required: Mapping[str, type] | None = None,
    optional: Mapping[str, type] | None = None,
) -> dict:
    return extract(await read_json(request), required, optional)


def query_params(
    request: Request,
    known: Mapping[str, type],
    defaults: Mapping[str, Any] | None = None,
) -> dict:
    """Parse the query string against a closed set of keys."""
    values = dict(defaults or {})
    for key in request.query_params:
        if key not in known:
            raise UnknownField(f"unexpected query parameter {key!r}")
    for key, expected in known.items():
        raw = request.query_params.get(key)
        if raw is None or raw == "":
            continue
        if expected is int:
            try:
                values[key] = int(raw)
            except ValueError:
                raise InvalidField(f"query parameter {key} must be an integer") from None
        else:
            values[key] = raw
    return values


async def read_upload(request: Request) -> tuple[dict, bytes]:
    """Parse the two-part upload form: 'meta' (JSON) and 'file' (bytes)."""
    content_type = request.headers.get("content-type", "")
    if not content_type.startswith("multipart/form-data"):
        raise InvalidField("upload requires multipart/form-data with parts 'meta' and 'file'")
    async with request.form() as form:
        for key in form:
            if key not in ("meta", "file"):
                raise UnknownField(f"unexpected form part {key!r}")
        if "meta" not in form:
            raise MissingField("missing form part 'meta'")
        if "file" not in form:
            raise MissingField("missing form part 'file'")
        raw_meta = form["meta"]
        if not isinstance(raw_meta, str):
            raw_meta = (await raw_meta.read()).decode("utf-8", errors="replace")
        try:
            parsed = json.loads(raw_meta)
        except json.JSONDecodeError as exc:
            raise MalformedJson(f"'meta' part is not valid JSON: {exc.msg}") from None
        if not isinstance(parsed, dict):
            raise MalformedJson("'meta' part must be a JSON object")
        meta = extract(parsed, required={"name": str, "media_type": str})
        upload = form["file"]
        data = upload.encode("utf-8") if isinstance(upload, str) else await upload.read()
    return meta, data
