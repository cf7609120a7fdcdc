"""Chat, the contact form, and the transactional email outbox.

Emails are never sent inline: the action that causes one enqueues it in the
outbox table inside its own transaction, and a separate drain step hands
pending rows to a pluggable transport. The default transport writes plain
text files so everything runs offline.
"""

from __future__ import annotations

import smtplib
import sqlite3
import uuid
from dataclasses import dataclass
from datetime import timedelta
from email.message import EmailMessage
from pathlib import Path
from typing import Protocol

from satep.clock import Clock, SystemClock, isoformat
from satep.errors import BodyTooLong, EmptyBody, InvalidField, NoRecipients, NotAuthenticated
from satep.principals import Principal, require_admin, require_authenticated, require_user
from satep.storage.db import Database

MAX_CHAT_BODY = 2000
MAX_DELIVERY_ATTEMPTS = 3

_DRAIN_LOCK = "outbox-drain"
# A drainer that died without releasing gets its lock stolen after this long.
_LOCK_STALE = timedelta(minutes=10)


class MailTransport(Protocol):
    def deliver(self, recipient: str, subject: str, body: str) -> bool: ...


class FileSinkTransport:
    """Writes each email as one UTF-8 text file in a spool directory."""

    def __init__(self, directory: str | Path, clock: Clock | None = None):
        self.directory = Path(directory)
        self._clock = clock or SystemClock()
        self._seq = 0

    def deliver(self, recipient: str, subject: str, body: str) -> bool:
        self.directory.mkdir(parents=True, exist_ok=True)
        self._seq += 1
        stamp = self._clock.now().strftime("%Y%m%dT%H%M%S")
        name = f"{stamp}-{self._seq:04d}-{uuid.uuid4().hex[:8]}.eml"
        text = (
            f"To: {recipient}\n"
            f"Subject: {subject}\n"
            f"Date: {isoformat(self._clock.now())}\n"
            f"\n"
            f"{body}\n"
        )
        (self.directory / name).write_text(text, encoding="utf-8")
        return True


class SmtpTransport:
    """Relays through a real SMTP server; failures are reported, not raised."""

    def __init__(self, host: str, port: int, username: str = "", secret: str = "",
                 sender: str = "no-reply@satep.local"):
        self.host = host
        self.port = port
        self.username = username
        self.secret = secret
        self.sender = sender

    def deliver(self, recipient: str, subject: str, body: str) -> bool:
        message = EmailMessage()
        message["From"] = self.sender
        message["To"] = recipient
        message["Subject"] = subject
        message.set_content(body)
        try:
            with smtplib.SMTP(self.host, self.port, timeout=30) as smtp:
                if self.username:
                    smtp.login(self.username, self.secret)
                smtp.send_message(message)
        except (OSError, smtplib.SMTPException):
            return False
        return True


@dataclass(frozen=True)
class DrainReport:
    sent: int
    failed: int


class Outbox:
    def __init__(self, db: Database, clock: Clock):
        self._db = db
        self._clock = clock

    def enqueue(self, recipient: str, subject: str, body: str) -> int:
        """Queue one email; joins any transaction already open on this thread."""
        with self._db.transaction():
            cur = self._db.execute(
                "INSERT INTO outbox (Recipient, Subject, Body, EnqueuedAt) VALUES (?, ?, ?, ?)",
                (recipient, subject, body, isoformat(self._clock.now())),
            )
            return cur.lastrowid

    def pending_count(self) -> int:
        return self._db.scalar("SELECT COUNT(*) FROM outbox WHERE Status = 'pending'")

    def drain(self, transport: MailTransport) -> DrainReport:
        """Hand every pending email to the transport once.

        Single-flight: a second concurrent drain returns (0, 0) immediately.
        A delivery failure leaves the row pending for the next drain until
        MAX_DELIVERY_ATTEMPTS, then parks it as failed.
        """
        holder = uuid.uuid4().hex
        if not self._acquire_lock(holder):
            return DrainReport(sent=0, failed=0)
        try:
            rows = self._db.query(
                "SELECT ID, Recipient, Subject, Body FROM outbox "
                "WHERE Status = 'pending' ORDER BY ID"
            )
            sent = failed = 0
            for row in rows:
                try:
                    ok = bool(transport.deliver(row["Recipient"], row["Subject"], row["Body"]))
                except Exception:
                    ok = False
                with self._db.transaction():
                    if ok:
                        self._db.execute(
                            "UPDATE outbox SET Status = 'sent', Attempts = Attempts + 1 "
                            "WHERE ID = ?",
                            (row["ID"],),
                        )
                        sent += 1
                    else:
                        self._db.execute(
                            "UPDATE outbox SET Attempts = Attempts + 1, "
                            "Status = CASE WHEN Attempts + 1 >= ? THEN 'failed' ELSE 'pending' END "
                            "WHERE ID = ?",
                            (MAX_DELIVERY_ATTEMPTS, row["ID"]),
                        )
                        failed += 1
            return DrainReport(sent=sent, failed=failed)
        finally:
            self._release_lock(holder)

    def _acquire_lock(self, holder: str) -> bool:
        now = self._clock.now()
        with self._db.transaction():
            self._db.execute(
                "DELETE FROM advisory_locks WHERE Name = ? AND AcquiredAt < ?",
                (_DRAIN_LOCK, isoformat(now - _LOCK_STALE)),
            )
            try:
                self._db.execute(
                    "INSERT INTO advisory_locks (Name, Holder, AcquiredAt) VALUES (?, ?, ?)",
                    (_DRAIN_LOCK, holder, isoformat(now)),
                )
            except sqlite3.IntegrityError:
                return False
        return True

    def _release_lock(self, holder: str) -> None:
        with self._db.transaction():
            self._db.execute(
                "DELETE FROM advisory_locks WHERE Name = ? AND Holder = ?",
                (_DRAIN_LOCK, holder),
            )


@dataclass(frozen=True)
class ChatMessage:
    id: int
    sender_kind: str
    sender_id: int
    sender_name: str
    body: str
    sent_at: str


@dataclass(frozen=True)
class ContactMessage:
    id: int
    am: int
    name: str
    email: str
    date: str
    time: str
    body: str


class MessagingService:
    """Single global chat room, contact form, and admin mass email."""

    def __init__(self, db: Database, clock: Clock, outbox: Outbox):
        self._db = db
        self._clock = clock
        self._outbox = outbox

    # -- chat ---------------------------------------------------------------

    def post_chat(self, principal: Principal | None, body: str) -> ChatMessage:
        principal = require_authenticated(principal)
        if not body or not body.strip():
            raise EmptyBody("chat message body must not be empty")
        if len(body) > MAX_CHAT_BODY:
            raise BodyTooLong(f"chat message exceeds {MAX_CHAT_BODY} characters")
        name = self._display_name(principal)
        sent_at = isoformat(self._clock.now())
        with self._db.transaction():
            cur = self._db.execute(
                "INSERT INTO messages (SenderKind, SenderId, SenderName, Body, SentAt) "
                "VALUES (?, ?, ?, ?, ?)",
                (principal.kind, principal.id, name, body, sent_at),
            )
            message_id = cur.lastrowid
        return ChatMessage(
            id=message_id,
            sender_kind=principal.kind,
            sender_id=principal.id,
            sender_name=name,
            body=body,
            sent_at=sent_at,
        )

    def fetch_chat(self, principal: Principal | None, after_id: int = 0,
                   limit: int = 50) -> list[ChatMessage]:
        """Messages with id > after_id, ascending, so clients poll with a cursor."""
        require_authenticated(principal)
        after_id = max(0, after_id)
        limit = max(1, min(limit, 500))
        rows = self._db.query(
            "SELECT ID, SenderKind, SenderId, SenderName, Body, SentAt FROM messages "
            "WHERE ID > ? ORDER BY ID ASC LIMIT ?",
            (after_id, limit),
        )
        return [
            ChatMessage(
                id=row["ID"],
                sender_kind=row["SenderKind"],
                sender_id=row["SenderId"],
                sender_name=row["SenderName"],
                body=row["Body"],
                sent_at=row["SentAt"],
            )
            for row in rows
        ]

    # -- contact form ---------------------------------------------------------

    def send_contact(self, principal: Principal | None, body: str) -> ContactMessage:
        """Name, email, date and time come from the account and the server clock;
        nothing identity-related is accepted from the client."""
        principal = require_user(principal)
        if not body or not body.strip():
            raise EmptyBody("contact message body must not be empty")
        account = self._db.query_one(
            "SELECT Name, Surname, Email FROM users WHERE AM = ?", (principal.id,)
        )
        if account is None:
            raise NotAuthenticated("account no longer exists")
        now = self._clock.now()
        name = f"{account['Name']} {account['Surname']}"
        date, time = now.strftime("%Y-%m-%d"), now.strftime("%H:%M:%S")
        with self._db.transaction():
            cur = self._db.execute(
                "INSERT INTO contact (AM, Name, Email, Date, Time, Body) "
                "VALUES (?, ?, ?, ?, ?, ?)",
                (principal.id, name, account["Email"], date, time, body),
            )
            contact_id = cur.lastrowid
        return ContactMessage(
            id=contact_id, am=principal.id, name=name, email=account["Email"],
            date=date, time=time, body=body,
        )

    def list_contact(self, principal: Principal | None) -> list[ContactMessage]:
        require_admin(principal)
        rows = self._db.query(
            "SELECT ID, AM, Name, Email, Date, Time, Body FROM contact ORDER BY ID DESC"
        )
        return [
            ContactMessage(
                id=row["ID"], am=row["AM"], name=row["Name"], email=row["Email"],
                date=row["Date"], time=row["Time"], body=row["Body"],
            )
            for row in rows
        ]

    # -- mass email -------------------------------------------------------------

    def mass_email(self, principal: Principal | None, subject: str, body: str) -> int:
        """Enqueue one email per approved user, all in one transaction.

        Pending registrations are deliberately excluded: they are not users yet.
        """
        require_admin(principal)
        if not subject or not subject.strip():
            raise InvalidField("subject must not be empty")
        if not body or not body.strip():
            raise EmptyBody("email body must not be empty")
        with self._db.transaction():
            emails = [row["Email"] for row in self._db.query("SELECT Email FROM users ORDER BY AM")]
            if not emails:
                raise NoRecipients("no registered users to email")
            for email in emails:
                self._outbox.enqueue(email, subject, body)
        return len(emails)

    def _display_name(self, principal: Principal) -> str:
        if principal.kind == "admin":
            row = self._db.query_one(
                "SELECT Name, Surname FROM admins WHERE IDadm = ?", (principal.id,)
            )
        else:
            row = self._db.query_one(
                "SELECT Name, Surname FROM users WHERE AM = ?", (principal.id,)
            )
        if row is None:
            raise NotAuthenticated("account no longer exists")
        return f"{row['Name']} {row['Surname']}"
