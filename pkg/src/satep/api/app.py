"""HTTP boundary: one route table drives registration, auth gates, and docs.

Every JSON response is wrapped in an envelope, {"ok": true, "data": ...} on
success or {"ok": false, "error": {code, message, http_status}} on failure.
The only exception is the raw file download endpoint. Authorization is
resolved before the body is even read, so the status for a wrong role never
depends on payload validity.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Any, Awaitable, Callable

from starlette.applications import Starlette
from starlette.exceptions import HTTPException
from starlette.middleware import Middleware
from starlette.middleware.cors import CORSMiddleware
from starlette.requests import Request
from starlette.responses import JSONResponse, Response
from starlette.routing import Route

from satep import errors
from satep.api.parsing import extract, query_params, read_body, read_upload
from satep.content import parse_question_kind
from satep.core.types import GapFillQuestion, MultipleChoiceQuestion, QuestionKind, SubmittedAnswer
from satep.errors import InvalidField, NotAuthenticated, NotAuthorized, SatepError
from satep.principals import ADMIN, USER, Principal
from satep.runtime import Platform
from satep.storage import Page

log = logging.getLogger("satep.api")

# Status for every error code; the envelope carries the same number.
ERROR_STATUS = {
    "MALFORMED_JSON": 400,
    "NOT_AUTHENTICATED": 401,
    "INVALID_CREDENTIALS": 401,
    "NOT_AUTHORIZED": 403,
    "NOT_OWNER": 403,
    "NOT_FOUND": 404,
    "METHOD_NOT_ALLOWED": 405,
    "DUPLICATE_USERNAME": 409,
    "DUPLICATE_EMAIL": 409,
    "DUPLICATE_REGISTER_NUMBER": 409,
    "DUPLICATE_TITLE": 409,
    "DUPLICATE_KEY": 409,
    "POOL_TOO_SMALL": 409,
    "OUTSIDE_WINDOW": 409,
    "ALREADY_OPEN": 409,
    "ALREADY_SUBMITTED": 409,
    "EXPIRED": 409,
    "NO_RECIPIENTS": 409,
    "REFERENCED_BY_ACTIVE_EXAM": 409,
    "UNKNOWN_FIELD": 422,
    "MISSING_FIELD": 422,
    "INVALID_FIELD": 422,
    "INVALID_QUESTION": 422,
    "INVALID_SCHEDULE": 422,
    "CAPTCHA_FAILED": 422,
    "EMPTY_BODY": 422,
    "BODY_TOO_LONG": 422,
    "EMPTY_FILE": 422,
    "FILE_TOO_LARGE": 422,
    "UNKNOWN_QUESTION": 422,
    "CONFIG_ERROR": 500,
    "STORAGE_UNAVAILABLE": 500,
    "MIGRATION_CONFLICT": 500,
    "INTERNAL": 500,
}

PUBLIC, AUTHENTICATED, USER_ONLY, ADMIN_ONLY = "public", "authenticated", "user", "admin"

Handler = Callable[[Platform, "Principal | None", Request], Awaitable[Any]]


@dataclass(frozen=True)
class RouteSpec:
    method: str
    path: str
    auth: str
    handler: Handler
    summary: str


def ok(data: Any) -> JSONResponse:
    return JSONResponse({"ok": True, "data": data})


def fail(code: str, message: str, status: int | None = None) -> JSONResponse:
    status = status or ERROR_STATUS.get(code, 500)
    return JSONResponse(
        {"ok": False, "error": {"code": code, "message": message, "http_status": status}},
        status_code=status,
    )


def _page(page: Page) -> dict:
    return asdict(page)


def _check_role(required: str, principal: Principal | None) -> None:
    if required == PUBLIC:
        return
    if principal is None:
        raise NotAuthenticated("this endpoint requires a session")
    if required == USER_ONLY and principal.kind != USER:
        raise NotAuthorized("this endpoint is for registered users")
    if required == ADMIN_ONLY and principal.kind != ADMIN:
        raise NotAuthorized("this endpoint is for administrators")


def bearer_token(request: Request) -> str | None:
    header = request.headers.get("authorization", "")
    scheme, _, token = header.partition(" ")
    if scheme.lower() == "bearer" and token.strip():
        return token.strip()
    return None


# --- session and profile -------------------------------------------------


async def post_captcha(platform, principal, request):
    prompt = platform.accounts.issue_captcha()
    return {"token": prompt.token, "prompt": prompt.prompt}


async def post_register(platform, principal, request):
    body = await read_body(request, required={
        "am": int, "name": str, "surname": str, "username": str, "password": str,
        "email": str, "department": str, "captcha_token": str, "captcha_answer": str,
    })
    am = platform.accounts.submit_registration(**body)
    return {"am": am, "status": "pending"}


async def post_login(platform, principal, request):
    body = await read_body(request, required={"username": str, "password": str})
    return platform.accounts.login(body["username"], body["password"])


async def post_logout(platform, principal, request):
    platform.accounts.logout(bearer_token(request))
    return {"logged_out": True}


async def post_recover(platform, principal, request):
    body = await read_body(request, required={"username": str})
    return {"message": platform.accounts.recover_password(body["username"])}


async def get_me(platform, principal, request):
    return platform.accounts.get_profile(principal)


async def patch_me(platform, principal, request):
    body = await read_body(request, optional={
        "username": str, "email": str, "password": str,
    })
    return platform.accounts.edit_own_profile(principal, body)


# --- registration review and user administration ---------------------------


async def get_registrations(platform, principal, request):
    return platform.accounts.list_registrations(principal)


async def post_registration_decision(platform, principal, request):
    am = request.path_params["am"]
    body = await read_body(request, required={"decision": str})
    return platform.accounts.decide_registration(principal, am, body["decision"])


async def get_users(platform, principal, request):
    params = query_params(
        request,
        {"field": str, "search": str, "page": int, "page_size": int},
        defaults={"field": "name", "search": "", "page": 1, "page_size": 20},
    )
    return _page(platform.accounts.search_users(
        principal, params["field"], params["search"], params["page"], params["page_size"],
    ))


async def patch_users(platform, principal, request):
    body = await read_body(
        request,
        required={"am": int},
        optional={"new_am": int, "name": str, "surname": str},
    )
    am = body.pop("am")
    changes = {("am" if k == "new_am" else k): v for k, v in body.items()}
    return platform.accounts.admin_edit_user(principal, am, changes)


async def delete_users(platform, principal, request):
    body = await read_body(request, required={"ams": list})
    ams = [_int_item("ams", v) for v in body["ams"]]
    return platform.accounts.admin_delete_users(principal, ams)


def _int_item(field: str, value) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidField(f"{field} must contain integers")
    return value


# --- lectures and files -------------------------------------------------------


async def get_lectures(platform, principal, request):
    return platform.content.list_lectures()


async def post_lectures(platform, principal, request):
    body = await read_body(request, required={"title": str})
    return platform.content.create_lecture(principal, body["title"])


async def delete_lectures(platform, principal, request):
    body = await read_body(request, required={"id": int})
    return platform.content.delete_lecture(principal, body["id"])


async def post_lecture_file(platform, principal, request):
    meta, data = await read_upload(request)
    return platform.content.upload_file(
        principal, request.path_params["lecture_id"],
        name=meta["name"], media_type=meta["media_type"], data=data,
    )


async def get_lecture_files(platform, principal, request):
    return platform.content.list_files(principal, request.path_params["lecture_id"])


async def get_file(platform, principal, request):
    meta, data = platform.content.download_file(principal, request.path_params["file_id"])
    filename = meta["name"].replace('"', "")
    return Response(
        content=data,
        media_type=meta["media_type"] or "application/octet-stream",
        headers={"Content-Disposition": f'attachment; filename="{filename}"'},
    )


async def delete_files(platform, principal, request):
    body = await read_body(request, required={"ids": list})
    ids = [_int_item("ids", v) for v in body["ids"]]
    return platform.content.delete_files(principal, ids)


# --- question bank ---------------------------------------------------------------


async def post_question(platform, principal, request):
    kind = parse_question_kind(request.path_params["kind"])
    if kind is QuestionKind.MULTIPLE_CHOICE:
        body = await read_body(request, required={
            "lecture_id": int, "question": str, "right_answer": str, "wrong_answers": list,
        })
        wrong = tuple(_str_item("wrong_answers", v) for v in body["wrong_answers"])
        question = MultipleChoiceQuestion(
            id=0, lecture=body["lecture_id"], question=body["question"],
            right_answer=body["right_answer"], wrong_answers=wrong,
        )
    else:
        body = await read_body(request, required={
            "lecture_id": int, "question": str, "answer": str,
        })
        question = GapFillQuestion(
            id=0, lecture=body["lecture_id"],
            question=body["question"], answer=body["answer"],
        )
    new_id = platform.content.insert_question(principal, question)
    return platform.content.get_question(principal, kind, new_id)


def _str_item(field: str, value) -> str:
    if not isinstance(value, str):
        raise InvalidField(f"{field} must contain strings")
    return value


async def patch_question(platform, principal, request):
    kind = parse_question_kind(request.path_params["kind"])
    if kind is QuestionKind.MULTIPLE_CHOICE:
        body = await read_body(request, required={"id": int}, optional={
            "lecture_id": int, "question": str, "right_answer": str, "wrong_answers": list,
        })
        if "wrong_answers" in body:
            body["wrong_answers"] = [_str_item("wrong_answers", v)
                                     for v in body["wrong_answers"]]
    else:
        body = await read_body(request, required={"id": int}, optional={
            "lecture_id": int, "question": str, "answer": str,
        })
    question_id = body.pop("id")
    return platform.content.edit_question(principal, kind, question_id, body)


async def delete_questions(platform, principal, request):
    kind = parse_question_kind(request.path_params["kind"])
    body = await read_body(request, required={"ids": list})
    ids = [_int_item("ids", v) for v in body["ids"]]
    return platform.content.delete_questions(principal, kind, ids)


async def get_questions(platform, principal, request):
    kind = parse_question_kind(request.path_params["kind"])
    params = query_params(
        request,
        {"search": str, "page": int, "page_size": int},
        defaults={"search": None, "page": 1, "page_size": 20},
    )
    return _page(platform.content.list_questions(
        principal, kind, params["page"], params["page_size"], params["search"],
    ))


# --- scheduling, sittings, results ---------------------------------------------------


async def put_schedule(platform, principal, request):
    body = await read_body(request, required={
        "date": str, "time": str, "duration_minutes": int,
    })
    return platform.exams.set_schedule(
        principal, request.path_params["kind"],
        body["date"], body["time"], body["duration_minutes"],
    )


async def get_schedule(platform, principal, request):
    return platform.exams.list_schedules(principal)


async def post_test_start(platform, principal, request):
    return platform.exams.start_test(principal, request.path_params["kind"])


async def post_test_submit(platform, principal, request):
    body = await read_body(request, required={"answers": list})
    answers = []
    for item in body["answers"]:
        if not isinstance(item, dict):
            raise InvalidField("answers must contain objects")
        fields = extract(item, required={"question_id": int, "kind": str, "response": str})
        answers.append(SubmittedAnswer(
            question_id=fields["question_id"],
            kind=parse_question_kind(fields["kind"]),
            response=fields["response"],
        ))
    return platform.exams.submit_test(principal, request.path_params["instance"], answers)


async def get_open_tests(platform, principal, request):
    return platform.exams.open_instances(principal)


async def get_my_results(platform, principal, request):
    return platform.exams.my_results(principal)


async def get_results(platform, principal, request):
    params = query_params(
        request,
        {"am": int, "kind": str, "page": int, "page_size": int},
        defaults={"am": None, "kind": None, "page": 1, "page_size": 20},
    )
    return _page(platform.exams.admin_results(
        principal, params["am"], params["kind"], params["page"], params["page_size"],
    ))


# --- messaging ----------------------------------------------------------------------


async def get_chat(platform, principal, request):
    params = query_params(
        request,
        {"after_id": int, "limit": int},
        defaults={"after_id": 0, "limit": 50},
    )
    messages = platform.messaging.fetch_chat(principal, params["after_id"], params["limit"])
    return [asdict(m) for m in messages]


async def post_chat(platform, principal, request):
    body = await read_body(request, required={"body": str})
    return asdict(platform.messaging.post_chat(principal, body["body"]))


async def post_contact(platform, principal, request):
    body = await read_body(request, required={"body": str})
    return asdict(platform.messaging.send_contact(principal, body["body"]))


async def get_contact(platform, principal, request):
    return [asdict(m) for m in platform.messaging.list_contact(principal)]


async def post_mass_email(platform, principal, request):
    body = await read_body(request, required={"subject": str, "body": str})
    recipients = platform.messaging.mass_email(principal, body["subject"], body["body"])
    return {"recipients": recipients}


async def get_health(platform, principal, request):
    return {"status": "ok"}


ROUTES: tuple[RouteSpec, ...] = (
    RouteSpec("GET", "/api/health", PUBLIC, get_health, "Liveness probe."),
    RouteSpec("POST", "/api/captcha", PUBLIC, post_captcha,
              "Issue an arithmetic captcha for registration."),
    RouteSpec("POST", "/api/register", PUBLIC, post_register,
              "Submit a registration; it waits for administrator approval."),
    RouteSpec("POST", "/api/login", PUBLIC, post_login,
              "Exchange credentials for a bearer token."),
    RouteSpec("POST", "/api/logout", AUTHENTICATED, post_logout,
              "Invalidate the presented session token."),
    RouteSpec("POST", "/api/recover", PUBLIC, post_recover,
              "Email a fresh password to the account on file."),
    RouteSpec("GET", "/api/me", AUTHENTICATED, get_me, "Profile of the session owner."),
    RouteSpec("PATCH", "/api/me", USER_ONLY, patch_me,
              "Change own username, email, or password."),
    RouteSpec("GET", "/api/lectures", PUBLIC, get_lectures,
              "Lecture titles; visible before login."),
    RouteSpec("POST", "/api/lectures", ADMIN_ONLY, post_lectures, "Create a lecture."),
    RouteSpec("DELETE", "/api/lectures", ADMIN_ONLY, delete_lectures,
              "Delete a lecture with its files and questions."),
    RouteSpec("POST", "/api/lectures/{lecture_id:int}/files", ADMIN_ONLY, post_lecture_file,
              "Attach a file; multipart parts 'meta' and 'file'."),
    RouteSpec("GET", "/api/lectures/{lecture_id:int}/files", AUTHENTICATED, get_lecture_files,
              "List a lecture's files."),
    RouteSpec("GET", "/api/files/{file_id:int}", AUTHENTICATED, get_file,
              "Download file bytes (raw, not enveloped)."),
    RouteSpec("DELETE", "/api/files", ADMIN_ONLY, delete_files, "Delete files by id."),
    RouteSpec("GET", "/api/registrations", ADMIN_ONLY, get_registrations,
              "Pending registrations, oldest first."),
    RouteSpec("POST", "/api/registrations/{am:int}/decision", ADMIN_ONLY,
              post_registration_decision, "Approve or reject a registration."),
    RouteSpec("GET", "/api/users", ADMIN_ONLY, get_users,
              "Search users by field with paging."),
    RouteSpec("PATCH", "/api/users", ADMIN_ONLY, patch_users,
              "Edit a user's register number or name."),
    RouteSpec("DELETE", "/api/users", ADMIN_ONLY, delete_users,
              "Delete users and everything they own."),
    RouteSpec("POST", "/api/questions/{kind}", ADMIN_ONLY, post_question,
              "Add a question; kind is multiple_choice or gap_fill."),
    RouteSpec("PATCH", "/api/questions/{kind}", ADMIN_ONLY, patch_question,
              "Edit a question; the merged result is revalidated."),
    RouteSpec("DELETE", "/api/questions/{kind}", ADMIN_ONLY, delete_questions,
              "Delete questions by id."),
    RouteSpec("GET", "/api/questions/{kind}", ADMIN_ONLY, get_questions,
              "Browse the question bank with search and paging."),
    RouteSpec("PUT", "/api/schedule/{kind}", ADMIN_ONLY, put_schedule,
              "Set date, time, and duration; kind is final_exam or lecture:<id>."),
    RouteSpec("GET", "/api/schedule", AUTHENTICATED, get_schedule,
              "Every stored schedule entry."),
    RouteSpec("POST", "/api/tests/{kind}/start", USER_ONLY, post_test_start,
              "Open a sitting and receive the presented questions."),
    RouteSpec("POST", "/api/tests/{instance}/submit", USER_ONLY, post_test_submit,
              "Submit answers for an open sitting."),
    RouteSpec("GET", "/api/tests/open", USER_ONLY, get_open_tests,
              "The caller's still-open sittings."),
    RouteSpec("GET", "/api/results/me", USER_ONLY, get_my_results,
              "The caller's graded attempts, newest first."),
    RouteSpec("GET", "/api/results", ADMIN_ONLY, get_results,
              "All graded attempts with filters and paging."),
    RouteSpec("GET", "/api/chat", AUTHENTICATED, get_chat,
              "Site-wide chat after a cursor."),
    RouteSpec("POST", "/api/chat", AUTHENTICATED, post_chat, "Post to the site-wide chat."),
    RouteSpec("POST", "/api/contact", USER_ONLY, post_contact,
              "Private message to the administrators."),
    RouteSpec("GET", "/api/contact", ADMIN_ONLY, get_contact,
              "Contact-box messages, newest first."),
    RouteSpec("POST", "/api/mass-email", ADMIN_ONLY, post_mass_email,
              "Queue an email to every registered user."),
)


def _make_endpoint(platform: Platform, spec: RouteSpec):
    async def endpoint(request: Request) -> Response:
        try:
            principal = platform.accounts.authenticate(bearer_token(request))
            _check_role(spec.auth, principal)
            result = await spec.handler(platform, principal, request)
        except SatepError as err:
            return fail(err.code, err.message)
        except Exception:
            log.exception("unhandled error in %s %s", spec.method, spec.path)
            return fail("INTERNAL", "internal error")
        if isinstance(result, Response):
            return result
        return ok(result)

    return endpoint


async def _router_error(request: Request, exc: HTTPException) -> JSONResponse:
    if exc.status_code == 405:
        return fail("METHOD_NOT_ALLOWED", "method not allowed for this path", 405)
    return fail("NOT_FOUND", "no such endpoint", exc.status_code)


def create_app(platform: Platform) -> Starlette:
    routes = [
        Route(spec.path, _make_endpoint(platform, spec), methods=[spec.method])
        for spec in ROUTES
    ]
    # the browser client may be served from another origin during development
    middleware = [Middleware(
        CORSMiddleware, allow_origins=["*"], allow_methods=["*"], allow_headers=["*"],
    )]
    return Starlette(
        routes=routes,
        middleware=middleware,
        exception_handlers={HTTPException: _router_error},
    )
