import random

import pytest

from satep.accounts import AccountService
from satep.clock import ManualClock
from satep.config import Config
from satep.content import ContentService
from satep.examinations import ExaminationService
from satep.messaging import FileSinkTransport, MessagingService, Outbox
from satep.passwords import PasswordHasher
from satep.principals import ADMIN, USER, Principal
from satep.runtime import Platform
from satep.storage import Database, ObjectStore, apply_migrations


@pytest.fixture
def clock():
    return ManualClock()


@pytest.fixture
def db(tmp_path, clock):
    database = Database(tmp_path / "satep.db")
    apply_migrations(database, clock=clock)
    yield database
    database.close()


@pytest.fixture
def store(tmp_path):
    return ObjectStore(tmp_path / "data")


# Low iteration count keeps hashing out of the test profile; production
# default stays high.
@pytest.fixture
def hasher():
    return PasswordHasher(iterations=10)


@pytest.fixture
def outbox(db, clock):
    return Outbox(db, clock)


@pytest.fixture
def accounts(db, clock, outbox, hasher):
    return AccountService(db, clock, outbox, hasher=hasher, rng=random.Random(7))


@pytest.fixture
def messaging(db, clock, outbox):
    return MessagingService(db, clock, outbox)


@pytest.fixture
def content(db, store):
    return ContentService(db, store)


@pytest.fixture
def exams(db, clock, outbox):
    return ExaminationService(db, clock, outbox, rng=random.Random(11))


@pytest.fixture
def platform(tmp_path, clock, db, store, outbox, accounts, content, exams, messaging):
    """The fully wired service set the HTTP layer is built over."""
    return Platform(
        config=Config(
            data_root=str(tmp_path),
            database_location=str(tmp_path / "satep.db"),
            mail_directory=str(tmp_path / "mail"),
        ),
        clock=clock,
        db=db,
        store=store,
        outbox=outbox,
        transport=FileSinkTransport(tmp_path / "mail", clock=clock),
        accounts=accounts,
        content=content,
        exams=exams,
        messaging=messaging,
    )


@pytest.fixture
def client(platform):
    from starlette.testclient import TestClient

    from satep.api import create_app

    return TestClient(create_app(platform))


@pytest.fixture
def seed_user(db, hasher):
    """Insert an approved user directly; returns their Principal."""

    def _seed(am=1, password="opensesame", **overrides):
        row = {
            "Name": overrides.get("name", "Nikos"),
            "Surname": overrides.get("surname", f"Papadakis{am}"),
            "Username": overrides.get("username", f"user{am}"),
            "Email": overrides.get("email", f"user{am}@example.org"),
            "Department": overrides.get("department", "Applied Informatics"),
        }
        db.execute(
            "INSERT INTO users (AM, Name, Surname, Username, Password, Email, Department) "
            "VALUES (?, ?, ?, ?, ?, ?, ?)",
            (am, row["Name"], row["Surname"], row["Username"],
             hasher.hash(password).password_digest, row["Email"], row["Department"]),
        )
        return Principal(kind=USER, id=am)

    return _seed


@pytest.fixture
def seed_admin(db, hasher):
    """Insert an administrator directly; returns their Principal."""

    def _seed(password="adminpass", **overrides):
        cur = db.execute(
            "INSERT INTO admins (Name, Surname, Username, Password, Email, Department) "
            "VALUES (?, ?, ?, ?, ?, ?)",
            (overrides.get("name", "Maria"),
             overrides.get("surname", "Stavrou"),
             overrides.get("username", "trainer"),
             hasher.hash(password).password_digest,
             overrides.get("email", "trainer@example.org"),
             overrides.get("department", "Applied Informatics")),
        )
        return Principal(kind=ADMIN, id=cur.lastrowid)

    return _seed


ACCEPTANCE_RESULTS: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    ACCEPTANCE_RESULTS.append((name, report.outcome.upper()))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{outcome:>6}  {name}")
