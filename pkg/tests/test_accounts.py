"""Registration, approval, sessions, recovery, and user administration."""

import re

import pytest

from satep.errors import (
    CaptchaFailed,
    DuplicateEmail,
    DuplicateRegisterNumber,
    DuplicateUsername,
    InvalidCredentials,
    InvalidField,
    NotAuthorized,
    NotFound,
)
from satep.principals import Principal
from satep.storage.ops import integrity_sweep

_PROMPT_RE = re.compile(r"What is (\d+) \+ (\d+)\?")


def solve(challenge) -> str:
    a, b = _PROMPT_RE.fullmatch(challenge.prompt).groups()
    return str(int(a) + int(b))


def register(accounts, am=10, username=None, **overrides):
    challenge = accounts.issue_captcha()
    fields = {
        "am": am,
        "name": overrides.get("name", "Eleni"),
        "surname": overrides.get("surname", "Georgiou"),
        "username": username or f"applicant{am}",
        "password": overrides.get("password", "first-password"),
        "email": overrides.get("email", f"applicant{am}@example.org"),
        "department": overrides.get("department", "Applied Informatics"),
    }
    return accounts.submit_registration(
        captcha_token=challenge.token, captcha_answer=solve(challenge), **fields
    )


def all_table_text(db) -> str:
    chunks = []
    tables = db.query("SELECT name FROM sqlite_master WHERE type = 'table'")
    for t in tables:
        for row in db.query(f"SELECT * FROM {t['name']}"):
            chunks.append(repr(tuple(row)))
    return "\n".join(chunks)


# --- captcha ----------------------------------------------------------------


def test_captcha_tokens_are_distinct(accounts):
    assert accounts.issue_captcha().token != accounts.issue_captcha().token


def test_captcha_is_single_use(accounts, db):
    challenge = accounts.issue_captcha()
    answer = solve(challenge)
    accounts.submit_registration(
        am=1, name="A", surname="B", username="u1", password="p",
        email="u1@example.org", department="CS",
        captcha_token=challenge.token, captcha_answer=answer,
    )
    with pytest.raises(CaptchaFailed):
        accounts.submit_registration(
            am=2, name="A", surname="B", username="u2", password="p",
            email="u2@example.org", department="CS",
            captcha_token=challenge.token, captcha_answer=answer,
        )


def test_wrong_captcha_stores_nothing(accounts, db):
    challenge = accounts.issue_captcha()
    with pytest.raises(CaptchaFailed):
        accounts.submit_registration(
            am=1, name="A", surname="B", username="u1", password="p",
            email="u1@example.org", department="CS",
            captcha_token=challenge.token, captcha_answer="999",
        )
    assert db.scalar("SELECT COUNT(*) FROM register") == 0


def test_wrong_answer_burns_the_captcha(accounts):
    challenge = accounts.issue_captcha()
    answer = solve(challenge)
    with pytest.raises(CaptchaFailed):
        accounts.submit_registration(
            am=1, name="A", surname="B", username="u1", password="p",
            email="u1@example.org", department="CS",
            captcha_token=challenge.token, captcha_answer="nope",
        )
    # correct answer no longer helps: first attempt consumed the challenge
    with pytest.raises(CaptchaFailed):
        accounts.submit_registration(
            am=1, name="A", surname="B", username="u1", password="p",
            email="u1@example.org", department="CS",
            captcha_token=challenge.token, captcha_answer=answer,
        )


def test_captcha_expires(accounts, clock):
    challenge = accounts.issue_captcha()
    clock.advance(minutes=11)
    with pytest.raises(CaptchaFailed):
        accounts.submit_registration(
            am=1, name="A", surname="B", username="u1", password="p",
            email="u1@example.org", department="CS",
            captcha_token=challenge.token, captcha_answer=solve(challenge),
        )


# --- registration and approval ------------------------------------------------


def test_registration_grants_no_access_until_approved(accounts, db):
    register(accounts, am=10)
    assert db.scalar("SELECT COUNT(*) FROM register WHERE AM = 10") == 1
    with pytest.raises(InvalidCredentials):
        accounts.login("applicant10", "first-password")


def test_duplicate_username_email_and_am_are_refused(accounts, seed_user, seed_admin):
    seed_user(am=1, username="taken", email="taken@example.org")
    seed_admin(username="boss", email="boss@example.org")
    register(accounts, am=10)

    with pytest.raises(DuplicateUsername):
        register(accounts, am=20, username="taken")
    with pytest.raises(DuplicateUsername):
        register(accounts, am=20, username="boss")
    with pytest.raises(DuplicateUsername):
        register(accounts, am=20, username="applicant10")
    with pytest.raises(DuplicateEmail):
        register(accounts, am=20, email="taken@example.org")
    with pytest.raises(DuplicateEmail):
        register(accounts, am=20, email="boss@example.org")
    with pytest.raises(DuplicateEmail):
        register(accounts, am=20, email="applicant10@example.org")
    with pytest.raises(DuplicateRegisterNumber):
        register(accounts, am=1)
    with pytest.raises(DuplicateRegisterNumber):
        register(accounts, am=10, username="fresh", email="fresh@example.org")


def test_registration_validates_profile(accounts):
    with pytest.raises(InvalidField):
        register(accounts, am=10, name="  ")
    with pytest.raises(InvalidField):
        register(accounts, am=10, email="not-an-address")
    with pytest.raises(InvalidField):
        register(accounts, am=0)
    with pytest.raises(InvalidField):
        register(accounts, am=10, password="")


def test_approval_moves_the_row_and_enables_login(accounts, db, seed_admin):
    admin = seed_admin()
    register(accounts, am=10)
    listed = accounts.list_registrations(admin)
    assert [r["am"] for r in listed] == [10]
    outcome = accounts.decide_registration(admin, 10, "approve")
    assert outcome == {"am": 10, "decision": "approve"}
    assert db.scalar("SELECT COUNT(*) FROM register") == 0
    assert db.scalar("SELECT COUNT(*) FROM users WHERE AM = 10") == 1
    session = accounts.login("applicant10", "first-password")
    assert session["kind"] == "user"
    assert session["am"] == 10
    assert integrity_sweep(db) == []


def test_rejection_frees_the_identifiers(accounts, db, seed_admin):
    admin = seed_admin()
    register(accounts, am=10)
    accounts.decide_registration(admin, 10, "reject")
    assert db.scalar("SELECT COUNT(*) FROM register") == 0
    register(accounts, am=10)  # same AM/username/email accepted again
    assert db.scalar("SELECT COUNT(*) FROM register WHERE AM = 10") == 1


def test_decision_gates_and_validation(accounts, seed_user, seed_admin):
    admin = seed_admin()
    with pytest.raises(NotFound):
        accounts.decide_registration(admin, 404, "approve")
    with pytest.raises(NotAuthorized):
        accounts.decide_registration(seed_user(), 404, "approve")
    with pytest.raises(InvalidField):
        accounts.decide_registration(admin, 404, "maybe")


# --- login and sessions ----------------------------------------------------------


def test_login_rejects_wrong_password_and_unknown_user_identically(accounts, seed_user):
    seed_user(am=1, password="right")
    with pytest.raises(InvalidCredentials) as wrong:
        accounts.login("user1", "wrong")
    with pytest.raises(InvalidCredentials) as unknown:
        accounts.login("ghost", "whatever")
    assert str(wrong.value) == str(unknown.value)


def test_session_round_trip(accounts, seed_user):
    seed_user(am=3, password="pw3")
    token = accounts.login("user3", "pw3")["token"]
    principal = accounts.authenticate(token)
    assert principal == Principal(kind="user", id=3)
    accounts.logout(token)
    assert accounts.authenticate(token) is None


def test_admin_login_yields_admin_principal(accounts, seed_admin):
    admin = seed_admin(password="bosspw")
    session = accounts.login("trainer", "bosspw")
    assert session["kind"] == "admin"
    principal = accounts.authenticate(session["token"])
    assert principal == Principal(kind="admin", id=admin.id)


def test_sessions_idle_expire_after_twelve_hours(accounts, seed_user, clock):
    seed_user(am=1, password="pw")
    token = accounts.login("user1", "pw")["token"]
    clock.advance(hours=13)
    assert accounts.authenticate(token) is None


def test_session_expiry_slides_with_use(accounts, seed_user, clock):
    seed_user(am=1, password="pw")
    token = accounts.login("user1", "pw")["token"]
    clock.advance(hours=7)
    assert accounts.authenticate(token) is not None
    clock.advance(hours=7)  # 14h since login, 7h since last use
    assert accounts.authenticate(token) is not None


def test_session_of_deleted_user_stops_working(accounts, seed_user, seed_admin):
    seed_user(am=1, password="pw")
    token = accounts.login("user1", "pw")["token"]
    accounts.admin_delete_users(seed_admin(), [1])
    assert accounts.authenticate(token) is None


def test_authenticate_handles_absent_tokens(accounts):
    assert accounts.authenticate(None) is None
    assert accounts.authenticate("") is None
    assert accounts.authenticate("not-a-token") is None


# --- password recovery --------------------------------------------------------------


def recovered_password(db) -> str:
    body = db.query("SELECT Body FROM outbox ORDER BY ID DESC")[0]["Body"]
    return re.search(r"Your new password is: (\S+)", body).group(1)


def test_recovery_resets_and_emails_the_password(accounts, db, outbox, seed_user):
    seed_user(am=1, password="old-password")
    ack = accounts.recover_password("user1")
    assert outbox.pending_count() == 1
    row = db.query_one("SELECT Recipient FROM outbox")
    assert row["Recipient"] == "user1@example.org"
    new_password = recovered_password(db)
    with pytest.raises(InvalidCredentials):
        accounts.login("user1", "old-password")
    assert accounts.login("user1", new_password)["am"] == 1
    assert ack == accounts.recover_password("no-such-user")


def test_recovery_is_silent_for_unknown_usernames(accounts, outbox):
    accounts.recover_password("ghost")
    assert outbox.pending_count() == 0


def test_two_recoveries_generate_distinct_passwords(accounts, db, seed_user):
    seed_user(am=1)
    accounts.recover_password("user1")
    first = recovered_password(db)
    accounts.recover_password("user1")
    second = recovered_password(db)
    assert first != second
    assert len(second) == 12
    assert any(c.islower() for c in second)
    assert any(c.isupper() for c in second)
    assert any(c.isdigit() for c in second)


def test_recovery_covers_users_not_admins(accounts, outbox, seed_admin):
    seed_admin(username="boss")
    accounts.recover_password("boss")
    assert outbox.pending_count() == 0


# --- profile editing ------------------------------------------------------------------


def test_edit_own_profile_changes_the_three_permitted_fields(accounts, seed_user):
    user = seed_user(am=1, password="old")
    updated = accounts.edit_own_profile(
        user, {"username": "newname", "email": "new@example.org", "password": "new"}
    )
    assert updated["username"] == "newname"
    assert updated["email"] == "new@example.org"
    with pytest.raises(InvalidCredentials):
        accounts.login("newname", "old")
    assert accounts.login("newname", "new")["am"] == 1


def test_identity_fields_are_ignored_on_self_edit(accounts, seed_user):
    user = seed_user(am=1)
    updated = accounts.edit_own_profile(
        user, {"surname": "Hacked", "name": "Hacked", "am": 99, "email": "ok@example.org"}
    )
    assert updated["surname"] == "Papadakis1"
    assert updated["name"] == "Nikos"
    assert updated["am"] == 1
    assert updated["email"] == "ok@example.org"


def test_self_edit_duplicate_checks_span_admins(accounts, seed_user, seed_admin):
    user = seed_user(am=1)
    seed_admin(username="boss", email="boss@example.org")
    with pytest.raises(DuplicateUsername):
        accounts.edit_own_profile(user, {"username": "boss"})
    with pytest.raises(DuplicateEmail):
        accounts.edit_own_profile(user, {"email": "boss@example.org"})
    # re-asserting your own current values is not a collision
    assert accounts.edit_own_profile(user, {"username": "user1"})["username"] == "user1"


def test_self_edit_requires_user_role(accounts, seed_admin):
    with pytest.raises(NotAuthorized):
        accounts.edit_own_profile(seed_admin(), {"username": "x"})


def test_self_edit_validates_values(accounts, seed_user):
    user = seed_user(am=1)
    with pytest.raises(InvalidField):
        accounts.edit_own_profile(user, {"username": "  "})
    with pytest.raises(InvalidField):
        accounts.edit_own_profile(user, {"email": "broken"})
    with pytest.raises(InvalidField):
        accounts.edit_own_profile(user, {"password": ""})


def test_admin_edit_user_changes_am_with_cascade(accounts, db, seed_user, seed_admin):
    admin = seed_admin()
    seed_user(am=15, password="pw")
    token = accounts.login("user15", "pw")["token"]
    db.execute("INSERT INTO history (AM, Date, Percent) VALUES (15, '2025-06-01', 80.0)")
    updated = accounts.admin_edit_user(admin, 15, {"am": 99, "surname": "Renamed"})
    assert updated["am"] == 99
    assert updated["surname"] == "Renamed"
    assert db.scalar("SELECT COUNT(*) FROM users WHERE AM = 15") == 0
    assert db.scalar("SELECT AM FROM history") == 99
    # the live session follows the renumbering
    assert accounts.authenticate(token) == Principal(kind="user", id=99)
    assert integrity_sweep(db) == []


def test_admin_edit_user_gates_and_collisions(accounts, seed_user, seed_admin):
    admin = seed_admin()
    seed_user(am=1)
    seed_user(am=2)
    with pytest.raises(NotFound):
        accounts.admin_edit_user(admin, 404, {"surname": "X"})
    with pytest.raises(DuplicateRegisterNumber):
        accounts.admin_edit_user(admin, 1, {"am": 2})
    with pytest.raises(NotAuthorized):
        accounts.admin_edit_user(seed_user(am=3), 1, {"surname": "X"})
    # unchanged AM is not a collision with itself
    assert accounts.admin_edit_user(admin, 1, {"am": 1, "name": "Kept"})["name"] == "Kept"


# --- deletion -------------------------------------------------------------------------


def test_delete_users_cascades_everything(accounts, db, messaging, seed_user, seed_admin):
    admin = seed_admin()
    user = seed_user(am=7, password="pw")
    token = accounts.login("user7", "pw")["token"]
    messaging.post_chat(user, "about to vanish")
    messaging.send_contact(user, "a question")
    db.execute("INSERT INTO history (AM, Date, Percent) VALUES (7, '2025-06-01', 50.0)")
    db.execute("INSERT INTO user_mult_test (IDUM, IDE, Position) VALUES (31, 1, 1)")
    db.execute("INSERT INTO user_fill_test (IDUF, IDF, Position) VALUES (41, 1, 1)")
    db.execute(
        "INSERT INTO user_complete_test (IDUM, IDUF, AM, Date, Percent) "
        "VALUES (31, 41, 7, '2025-06-01', 50.0)"
    )
    report = accounts.admin_delete_users(admin, [7, 404])
    assert report == [{"am": 7, "deleted": True}, {"am": 404, "deleted": False}]
    for table in ("users", "history", "user_complete_test", "contact", "messages"):
        assert db.scalar(f"SELECT COUNT(*) FROM {table}") == 0, table
    assert db.scalar("SELECT COUNT(*) FROM user_mult_test WHERE IDUM = 31") == 0
    assert db.scalar("SELECT COUNT(*) FROM user_fill_test WHERE IDUF = 41") == 0
    assert accounts.authenticate(token) is None
    assert integrity_sweep(db) == []


def test_delete_users_keeps_the_shared_empty_group(accounts, db, seed_user, seed_admin):
    from satep.core.types import QuestionKind, TestGroup
    from satep.storage.ops import persist_test_groups

    admin = seed_admin()
    seed_user(am=7)
    db.execute("INSERT INTO lectures (IDD, Lecture) VALUES (1, 'L1')")
    db.execute(
        "INSERT INTO multiple_questions (IDE, IDD, Question, RA, WA1) "
        "VALUES (1, 1, 'q', 'r', 'w')"
    )
    idum, iduf = persist_test_groups(
        db,
        TestGroup(kind=QuestionKind.MULTIPLE_CHOICE, question_ids=(1,)),
        TestGroup(kind=QuestionKind.GAP_FILL, question_ids=()),
    )
    assert iduf == 0
    db.execute(
        "INSERT INTO user_complete_test (IDUM, IDUF, AM, Date, Percent) "
        "VALUES (?, ?, 7, '2025-06-01', 100.0)",
        (idum, iduf),
    )
    accounts.admin_delete_users(admin, [7])
    # the sentinel "no questions" group is shared and must survive
    assert db.scalar("SELECT COUNT(*) FROM user_fill_test WHERE IDUF = 0") == 1
    assert db.scalar("SELECT COUNT(*) FROM user_mult_test WHERE IDUM = ?", (idum,)) == 0


def test_delete_users_empty_list_and_role_gate(accounts, seed_user, seed_admin):
    assert accounts.admin_delete_users(seed_admin(), []) == []
    with pytest.raises(NotAuthorized):
        accounts.admin_delete_users(seed_user(), [1])


# --- search ---------------------------------------------------------------------------


def test_search_users_pages_and_hides_credentials(accounts, seed_user, seed_admin):
    admin = seed_admin()
    for am in range(1, 6):
        seed_user(am=am)
    page = accounts.search_users(admin, field="surname", needle="papadakis", page=1, page_size=2)
    assert page.total == 5
    assert [u["am"] for u in page.items] == [1, 2]
    assert all("password" not in {k.lower() for k in u} for u in page.items)
    by_email = accounts.search_users(admin, field="email", needle="user3@", page=1, page_size=10)
    assert [u["am"] for u in by_email.items] == [3]
    with pytest.raises(InvalidField):
        accounts.search_users(admin, field="password", needle="x")


# --- seeding and credential opacity ------------------------------------------------------


def test_seed_admin_creates_a_working_account(accounts, db):
    seeded = accounts.seed_admin(
        name="Root", surname="Admin", username="root",
        email="root@example.org", department="IT",
    )
    assert accounts.login("root", seeded["password"])["kind"] == "admin"
    with pytest.raises(DuplicateUsername):
        accounts.seed_admin(
            name="Root", surname="Admin", username="root",
            email="other@example.org", department="IT",
        )
    assert db.scalar("SELECT COUNT(*) FROM admins") == 1


def test_plaintext_passwords_never_reach_storage(accounts, db, seed_admin):
    distinctive = "Zebra!Quartz77"
    register(accounts, am=10, password=distinctive)
    accounts.decide_registration(seed_admin(), 10, "approve")
    accounts.seed_admin(
        name="Root", surname="Admin", username="root",
        email="root@example.org", department="IT",
    )
    dump = all_table_text(db)
    assert distinctive not in dump
    assert "adminpass" not in dump  # the fixture admin's password
    assert dump.count("pbkdf2_sha256$") >= 2
