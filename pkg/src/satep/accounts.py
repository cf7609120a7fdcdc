"""Registration, approval, sessions, recovery, and user administration.

Approval model: applicants land in the register table and cannot log in;
an administrator either moves the row to users (approve) or deletes it
(reject). Usernames, emails, and register numbers are unique across the
account tables as a whole, never just within one.
"""

from __future__ import annotations

import hashlib
import hmac
import secrets
import sqlite3
from dataclasses import dataclass
from datetime import timedelta
from random import SystemRandom

from satep.clock import Clock, isoformat
from satep.core.types import PersonProfile, validate_register_number
from satep.errors import (
    CaptchaFailed,
    DuplicateEmail,
    DuplicateKey,
    DuplicateRegisterNumber,
    DuplicateUsername,
    InvalidCredentials,
    InvalidField,
    NotAuthenticated,
    NotFound,
)
from satep.messaging import Outbox
from satep.passwords import PasswordHasher, generate_password
from satep.principals import ADMIN, USER, Principal, require_admin, require_authenticated, require_user
from satep.storage.db import Database
from satep.storage.ops import EMPTY_GROUP_ID, Page, search_records

RECOVERY_ACK = "If the account exists, a new password has been emailed to it."

_USER_FIELDS = "AM, Name, Surname, Username, Password, Email, Department"


def _captcha_digest(token: str, answer: str) -> str:
    return hashlib.sha256(f"{token}:{answer.strip()}".encode()).hexdigest()


@dataclass(frozen=True)
class CaptchaPrompt:
    token: str
    prompt: str


class AccountService:
    def __init__(
        self,
        db: Database,
        clock: Clock,
        outbox: Outbox,
        hasher: PasswordHasher | None = None,
        rng=None,
        session_ttl_hours: float = 12,
        captcha_ttl_minutes: float = 10,
    ):
        self._db = db
        self._clock = clock
        self._outbox = outbox
        self._hasher = hasher or PasswordHasher()
        self._rng = rng or SystemRandom()
        self._session_ttl = timedelta(hours=session_ttl_hours)
        self._captcha_ttl = timedelta(minutes=captcha_ttl_minutes)
        # verified against when the username is unknown, so both login paths
        # cost one digest computation
        self._decoy_digest = self._hasher.hash("decoy").password_digest

    # -- captcha -------------------------------------------------------------

    def issue_captcha(self) -> CaptchaPrompt:
        a, b = self._rng.randint(2, 9), self._rng.randint(2, 9)
        token = secrets.token_urlsafe(16)
        now = self._clock.now()
        with self._db.transaction():
            self._db.execute("DELETE FROM captchas WHERE ExpiresAt <= ?", (isoformat(now),))
            self._db.execute(
                "INSERT INTO captchas (Token, AnswerDigest, ExpiresAt) VALUES (?, ?, ?)",
                (token, _captcha_digest(token, str(a + b)), isoformat(now + self._captcha_ttl)),
            )
        return CaptchaPrompt(token=token, prompt=f"What is {a} + {b}?")

    def _consume_captcha(self, token: str, answer: str) -> bool:
        """Single use: the first verification attempt burns the challenge."""
        if not token:
            return False
        with self._db.transaction():
            row = self._db.query_one(
                "SELECT AnswerDigest, ExpiresAt, Used FROM captchas WHERE Token = ?", (token,)
            )
            if row is None or row["Used"]:
                return False
            self._db.execute("UPDATE captchas SET Used = 1 WHERE Token = ?", (token,))
            if row["ExpiresAt"] <= isoformat(self._clock.now()):
                return False
            return hmac.compare_digest(row["AnswerDigest"], _captcha_digest(token, str(answer)))

    # -- registration ---------------------------------------------------------

    def submit_registration(
        self,
        *,
        am: int,
        name: str,
        surname: str,
        username: str,
        password: str,
        email: str,
        department: str,
        captcha_token: str,
        captcha_answer: str,
    ) -> int:
        if not self._consume_captcha(captcha_token, captcha_answer):
            raise CaptchaFailed("captcha missing, expired, or answered incorrectly")
        validate_register_number(am)
        PersonProfile(
            name=name, surname=surname, username=username, email=email, department=department
        ).validate()
        if not password:
            raise InvalidField("password must not be empty")
        digest = self._hasher.hash(password).password_digest
        with self._db.transaction():
            self._assert_username_free(username)
            self._assert_email_free(email)
            self._assert_am_free(am)
            try:
                self._db.execute(
                    f"INSERT INTO register ({_USER_FIELDS}, SubmittedAt) "
                    "VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                    (am, name, surname, username, digest, email, department,
                     isoformat(self._clock.now())),
                )
            except sqlite3.IntegrityError as exc:
                raise _duplicate_error(exc) from exc
        return am

    def list_registrations(self, principal: Principal | None) -> list[dict]:
        require_admin(principal)
        rows = self._db.query(
            "SELECT AM, Name, Surname, Username, Email, Department, SubmittedAt "
            "FROM register ORDER BY SubmittedAt, AM"
        )
        return [
            {
                "am": r["AM"], "name": r["Name"], "surname": r["Surname"],
                "username": r["Username"], "email": r["Email"],
                "department": r["Department"], "submitted_at": r["SubmittedAt"],
            }
            for r in rows
        ]

    def decide_registration(self, principal: Principal | None, am: int, decision: str) -> dict:
        require_admin(principal)
        if decision not in ("approve", "reject"):
            raise InvalidField(f"decision must be approve or reject, got {decision!r}")
        with self._db.transaction():
            row = self._db.query_one("SELECT * FROM register WHERE AM = ?", (am,))
            if row is None:
                raise NotFound(f"no pending registration for register number {am}")
            if decision == "approve":
                self._db.execute(
                    f"INSERT INTO users ({_USER_FIELDS}) VALUES (?, ?, ?, ?, ?, ?, ?)",
                    (row["AM"], row["Name"], row["Surname"], row["Username"],
                     row["Password"], row["Email"], row["Department"]),
                )
            self._db.execute("DELETE FROM register WHERE AM = ?", (am,))
        return {"am": am, "decision": decision}

    # -- sessions ---------------------------------------------------------------

    def login(self, username: str, password: str) -> dict:
        admin = self._db.query_one("SELECT * FROM admins WHERE Username = ?", (username,))
        user = None
        if admin is None:
            user = self._db.query_one("SELECT * FROM users WHERE Username = ?", (username,))
        row = admin if admin is not None else user
        if row is None:
            # same digest work as the found path, same message either way
            self._hasher.verify(password, self._decoy_digest)
            raise InvalidCredentials("unknown username or wrong password")
        if not self._hasher.verify(password, row["Password"]):
            raise InvalidCredentials("unknown username or wrong password")
        kind = ADMIN if admin is not None else USER
        principal_id = row["IDadm"] if admin is not None else row["AM"]
        token = secrets.token_urlsafe(32)
        with self._db.transaction():
            self._db.execute(
                "INSERT INTO sessions (Token, PrincipalKind, PrincipalId, ExpiresAt) "
                "VALUES (?, ?, ?, ?)",
                (token, kind, principal_id, isoformat(self._clock.now() + self._session_ttl)),
            )
        return {"token": token, **_profile_dict(kind, row)}

    def logout(self, token: str) -> None:
        with self._db.transaction():
            self._db.execute("DELETE FROM sessions WHERE Token = ?", (token,))

    def authenticate(self, token: str | None) -> Principal | None:
        """Resolve a bearer token; returns None for absent/expired/orphaned sessions.

        Each successful use slides the expiry forward (idle timeout).
        """
        if not token:
            return None
        row = self._db.query_one(
            "SELECT PrincipalKind, PrincipalId, ExpiresAt FROM sessions WHERE Token = ?",
            (token,),
        )
        if row is None:
            return None
        if row["ExpiresAt"] <= isoformat(self._clock.now()):
            self.logout(token)
            return None
        kind, principal_id = row["PrincipalKind"], row["PrincipalId"]
        table, key = ("admins", "IDadm") if kind == ADMIN else ("users", "AM")
        if self._db.scalar(f"SELECT 1 FROM {table} WHERE {key} = ?", (principal_id,)) is None:
            self.logout(token)
            return None
        with self._db.transaction():
            self._db.execute(
                "UPDATE sessions SET ExpiresAt = ? WHERE Token = ?",
                (isoformat(self._clock.now() + self._session_ttl), token),
            )
        return Principal(kind=kind, id=principal_id)

    # -- recovery -----------------------------------------------------------------

    def recover_password(self, username: str) -> str:
        """Reset to a generated password and email it; the acknowledgment is
        identical whether or not the username exists."""
        row = self._db.query_one(
            "SELECT AM, Email FROM users WHERE Username = ?", (username,)
        )
        if row is not None:
            new_password = generate_password(self._rng)
            digest = self._hasher.hash(new_password).password_digest
            with self._db.transaction():
                self._db.execute(
                    "UPDATE users SET Password = ? WHERE AM = ?", (digest, row["AM"])
                )
                self._outbox.enqueue(
                    row["Email"],
                    "Password recovery",
                    f"Hello {username},\n\nyour password was reset. "
                    f"Your new password is: {new_password}\n",
                )
        return RECOVERY_ACK

    # -- profiles --------------------------------------------------------------------

    def get_profile(self, principal: Principal | None) -> dict:
        principal = require_authenticated(principal)
        row = self._account_row(principal)
        return _profile_dict(principal.kind, row)

    def edit_own_profile(self, principal: Principal | None, changes: dict) -> dict:
        """Self-service edit of username, email, and password; identity fields
        (AM, name, surname) are ignored even if supplied."""
        principal = require_user(principal)
        row = self._account_row(principal)
        permitted = {
            k: v for k, v in changes.items()
            if k in ("username", "email", "password") and v is not None
        }
        with self._db.transaction():
            if "username" in permitted:
                username = permitted["username"]
                if not username or not username.strip():
                    raise InvalidField("username must not be empty")
                self._assert_username_free(username, user_am=principal.id)
            if "email" in permitted:
                email = permitted["email"]
                PersonProfile(
                    name=row["Name"], surname=row["Surname"], username=row["Username"],
                    email=email, department=row["Department"],
                ).validate()
                self._assert_email_free(email, user_am=principal.id)
            if "password" in permitted:
                if not permitted["password"]:
                    raise InvalidField("password must not be empty")
                permitted["password"] = self._hasher.hash(permitted["password"]).password_digest
            column = {"username": "Username", "email": "Email", "password": "Password"}
            for field, value in permitted.items():
                self._db.execute(
                    f"UPDATE users SET {column[field]} = ? WHERE AM = ?", (value, principal.id)
                )
        return self.get_profile(principal)

    def admin_edit_user(self, principal: Principal | None, am: int, changes: dict) -> dict:
        """Administrator edit of the fields the user cannot touch: AM, name, surname."""
        require_admin(principal)
        with self._db.transaction():
            row = self._db.query_one("SELECT * FROM users WHERE AM = ?", (am,))
            if row is None:
                raise NotFound(f"user {am} does not exist")
            new_am = changes.get("am", am)
            if new_am is None:
                new_am = am
            validate_register_number(new_am)
            name = changes.get("name", row["Name"]) or row["Name"]
            surname = changes.get("surname", row["Surname"]) or row["Surname"]
            if not name.strip() or not surname.strip():
                raise InvalidField("name and surname must not be empty")
            if new_am != am:
                self._assert_am_free(new_am)
            # users.AM update cascades through the enforced foreign keys
            # (history, user_complete_test, contact, test_instances); sessions
            # and chat messages reference principals without a key, by design
            self._db.execute(
                "UPDATE users SET AM = ?, Name = ?, Surname = ? WHERE AM = ?",
                (new_am, name, surname, am),
            )
            if new_am != am:
                self._db.execute(
                    "UPDATE sessions SET PrincipalId = ? "
                    "WHERE PrincipalKind = 'user' AND PrincipalId = ?",
                    (new_am, am),
                )
                self._db.execute(
                    "UPDATE messages SET SenderId = ? "
                    "WHERE SenderKind = 'user' AND SenderId = ?",
                    (new_am, am),
                )
        return self.get_profile(Principal(kind=USER, id=new_am))

    def admin_delete_users(self, principal: Principal | None, ams: list[int]) -> list[dict]:
        require_admin(principal)
        return [{"am": am, "deleted": self._delete_user(am)} for am in ams]

    def search_users(self, principal: Principal | None, field: str = "name",
                     needle: str = "", page: int = 1, page_size: int = 20) -> Page:
        require_admin(principal)
        found = search_records(self._db, "users", field, needle, page, page_size)
        items = [
            {
                "am": r["AM"], "name": r["Name"], "surname": r["Surname"],
                "username": r["Username"], "email": r["Email"],
                "department": r["Department"],
            }
            for r in found.items
        ]
        return Page(items=items, total=found.total, page=found.page, page_size=found.page_size)

    # -- operator seeding -----------------------------------------------------------

    def seed_admin(self, *, name: str, surname: str, username: str, email: str,
                   department: str) -> dict:
        """Create an administrator with a generated one-time password.

        No session gate: this is invoked from the operator CLI, not over HTTP.
        """
        PersonProfile(
            name=name, surname=surname, username=username, email=email, department=department
        ).validate()
        password = generate_password(self._rng)
        digest = self._hasher.hash(password).password_digest
        with self._db.transaction():
            self._assert_username_free(username)
            self._assert_email_free(email)
            try:
                cur = self._db.execute(
                    "INSERT INTO admins (Name, Surname, Username, Password, Email, Department) "
                    "VALUES (?, ?, ?, ?, ?, ?)",
                    (name, surname, username, digest, email, department),
                )
            except sqlite3.IntegrityError as exc:
                raise _duplicate_error(exc) from exc
            admin_id = cur.lastrowid
        return {"id": admin_id, "username": username, "password": password}

    # -- internals ---------------------------------------------------------------------

    def _account_row(self, principal: Principal):
        table, key = ("admins", "IDadm") if principal.kind == ADMIN else ("users", "AM")
        row = self._db.query_one(f"SELECT * FROM {table} WHERE {key} = ?", (principal.id,))
        if row is None:
            raise NotAuthenticated("account no longer exists")
        return row

    def _delete_user(self, am: int) -> bool:
        with self._db.transaction():
            if self._db.scalar("SELECT 1 FROM users WHERE AM = ?", (am,)) is None:
                return False
            groups = self._db.query(
                "SELECT IDUM, IDUF FROM user_complete_test WHERE AM = ? "
                "UNION SELECT IDUM, IDUF FROM test_instances WHERE AM = ?",
                (am, am),
            )
            mc_groups = {g["IDUM"] for g in groups} - {EMPTY_GROUP_ID}
            gf_groups = {g["IDUF"] for g in groups} - {EMPTY_GROUP_ID}
            # cascades: history, user_complete_test, contact, test_instances
            self._db.execute("DELETE FROM users WHERE AM = ?", (am,))
            for gid in mc_groups:
                self._db.execute("DELETE FROM user_mult_test WHERE IDUM = ?", (gid,))
            for gid in gf_groups:
                self._db.execute("DELETE FROM user_fill_test WHERE IDUF = ?", (gid,))
            self._db.execute(
                "DELETE FROM messages WHERE SenderKind = 'user' AND SenderId = ?", (am,)
            )
            self._db.execute(
                "DELETE FROM sessions WHERE PrincipalKind = 'user' AND PrincipalId = ?", (am,)
            )
        return True

    def _assert_username_free(self, username: str, *, user_am: int | None = None,
                              admin_id: int | None = None) -> None:
        in_users = self._db.query_one("SELECT AM FROM users WHERE Username = ?", (username,))
        if in_users is not None and in_users["AM"] != user_am:
            raise DuplicateUsername(f"username {username!r} is already taken")
        if self._db.scalar("SELECT 1 FROM register WHERE Username = ?", (username,)) is not None:
            raise DuplicateUsername(f"username {username!r} has a pending registration")
        in_admins = self._db.query_one("SELECT IDadm FROM admins WHERE Username = ?", (username,))
        if in_admins is not None and in_admins["IDadm"] != admin_id:
            raise DuplicateUsername(f"username {username!r} is already taken")

    def _assert_email_free(self, email: str, *, user_am: int | None = None,
                           admin_id: int | None = None) -> None:
        in_users = self._db.query_one("SELECT AM FROM users WHERE Email = ?", (email,))
        if in_users is not None and in_users["AM"] != user_am:
            raise DuplicateEmail(f"email {email!r} is already in use")
        if self._db.scalar("SELECT 1 FROM register WHERE Email = ?", (email,)) is not None:
            raise DuplicateEmail(f"email {email!r} has a pending registration")
        in_admins = self._db.query_one("SELECT IDadm FROM admins WHERE Email = ?", (email,))
        if in_admins is not None and in_admins["IDadm"] != admin_id:
            raise DuplicateEmail(f"email {email!r} is already in use")

    def _assert_am_free(self, am: int) -> None:
        if self._db.scalar("SELECT 1 FROM users WHERE AM = ?", (am,)) is not None:
            raise DuplicateRegisterNumber(f"register number {am} is already in use")
        if self._db.scalar("SELECT 1 FROM register WHERE AM = ?", (am,)) is not None:
            raise DuplicateRegisterNumber(f"register number {am} has a pending registration")


def _profile_dict(kind: str, row) -> dict:
    base = {
        "kind": kind,
        "name": row["Name"],
        "surname": row["Surname"],
        "username": row["Username"],
        "email": row["Email"],
        "department": row["Department"],
    }
    if kind == ADMIN:
        base["id"] = row["IDadm"]
    else:
        base["am"] = row["AM"]
    return base


def _duplicate_error(exc: sqlite3.IntegrityError):
    text = str(exc)
    if "Username" in text:
        return DuplicateUsername("username is already taken")
    if "Email" in text:
        return DuplicateEmail("email is already in use")
    if ".AM" in text:
        return DuplicateRegisterNumber("register number is already in use")
    return DuplicateKey(text)
