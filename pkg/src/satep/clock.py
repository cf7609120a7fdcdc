"""Injectable clock so every time-dependent path is testable."""

from __future__ import annotations

from datetime import datetime, timedelta, timezone


class Clock:
    """Time source. Production uses SystemClock; tests inject ManualClock."""

    def now(self) -> datetime:
        raise NotImplementedError

    def today(self) -> str:
        return self.now().strftime("%Y-%m-%d")


class SystemClock(Clock):
    def now(self) -> datetime:
        return datetime.now(timezone.utc)


class ManualClock(Clock):
    """Clock frozen at a settable instant, advanced explicitly by tests."""

    def __init__(self, start: datetime | None = None):
        self._now = start or datetime(2025, 6, 1, 8, 0, 0, tzinfo=timezone.utc)

    def now(self) -> datetime:
        return self._now

    def advance(self, seconds: float = 0, minutes: float = 0, hours: float = 0) -> None:
        self._now += timedelta(seconds=seconds, minutes=minutes, hours=hours)

    def set(self, moment: datetime) -> None:
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        self._now = moment


def isoformat(moment: datetime) -> str:
    """Canonical UTC timestamp text stored in the database and sent on the wire."""
    return moment.astimezone(timezone.utc).isoformat()


def parse_timestamp(text: str) -> datetime:
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt
