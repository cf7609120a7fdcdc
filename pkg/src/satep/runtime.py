"""Wires configuration into a ready-to-serve set of services."""

from __future__ import annotations

import random
from dataclasses import dataclass
from pathlib import Path

from satep.accounts import AccountService
from satep.clock import Clock, SystemClock
from satep.config import Config
from satep.content import ContentService
from satep.examinations import Blueprints, ExaminationService
from satep.messaging import (
    FileSinkTransport,
    MailTransport,
    MessagingService,
    Outbox,
    SmtpTransport,
)
from satep.passwords import PasswordHasher
from satep.storage import Database, ObjectStore


@dataclass
class Platform:
    config: Config
    clock: Clock
    db: Database
    store: ObjectStore
    outbox: Outbox
    transport: MailTransport
    accounts: AccountService
    content: ContentService
    exams: ExaminationService
    messaging: MessagingService

    def drain_outbox(self):
        return self.outbox.drain(self.transport)

    def close(self) -> None:
        self.db.close()


def build_platform(config: Config, *, clock: Clock | None = None) -> Platform:
    """Construct every service against one database and one clock.

    Does not apply migrations; callers decide when schema changes run.
    """
    clock = clock or SystemClock()
    rng = random.Random(config.rng_seed)
    db = Database(config.database_location)
    store = ObjectStore(Path(config.data_root) / "objects")
    outbox = Outbox(db, clock)
    if config.mail_transport == "smtp":
        transport: MailTransport = SmtpTransport(
            config.smtp_host, config.smtp_port, config.smtp_user, config.smtp_secret
        )
    else:
        transport = FileSinkTransport(Path(config.mail_directory), clock=clock)
    blueprints = Blueprints(
        final_mc=config.final_mc,
        final_gf=config.final_gf,
        lecture_mc=config.lecture_mc,
        lecture_gf=config.lecture_gf,
    )
    return Platform(
        config=config,
        clock=clock,
        db=db,
        store=store,
        outbox=outbox,
        transport=transport,
        accounts=AccountService(
            db, clock, outbox,
            hasher=PasswordHasher(),
            rng=rng,
            session_ttl_hours=config.session_ttl_hours,
        ),
        content=ContentService(db, store, max_upload_bytes=config.max_upload_bytes),
        exams=ExaminationService(db, clock, outbox, rng=rng, blueprints=blueprints),
        messaging=MessagingService(db, clock, outbox),
    )
