from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime, timedelta, timezone

from src.orbit.constants import SECONDS_PER_DAY

J2000 = datetime(2000, 1, 1, 12, 0, 0, tzinfo=timezone.utc)
SCENARIO_TIME_FORMAT = "%Y-%m-%d %H:%M:%S"


@dataclass(frozen=True, order=True)
class Epoch:
    """
    An instant on a uniform UTC scale (no leap seconds), stored as seconds since J2000.

    :param utc_seconds: float -- Seconds since 2000-01-01T12:00:00 UTC
    """

    utc_seconds: float

    @classmethod
    def from_datetime(cls, value: datetime) -> Epoch:
        if value.tzinfo is None:
            value = value.replace(tzinfo=timezone.utc)
        delta = value - J2000
        # Integer parts first so the float only carries the sub-second remainder
        return cls(delta.days * SECONDS_PER_DAY + delta.seconds + delta.microseconds / 1e6)

    @classmethod
    def parse(cls, text: str) -> Epoch:
        """Parses 'YYYY-MM-DD HH:MM:SS' (UTC) as used in scenario files."""
        return cls.from_datetime(datetime.strptime(text.strip(), SCENARIO_TIME_FORMAT))

    @property
    def days_since_j2000(self) -> float:
        return self.utc_seconds / SECONDS_PER_DAY

    def to_datetime(self) -> datetime:
        return J2000 + timedelta(seconds=self.utc_seconds)

    def isoformat(self) -> str:
        """ISO-8601 UTC with millisecond precision, e.g. '2022-09-01T01:02:52.800Z'."""
        return self.to_datetime().strftime("%Y-%m-%dT%H:%M:%S.%f")[:-3] + "Z"

    def __add__(self, seconds: float) -> Epoch:
        return Epoch(self.utc_seconds + float(seconds))

    def __sub__(self, other):
        if isinstance(other, Epoch):
            return self.utc_seconds - other.utc_seconds
        return Epoch(self.utc_seconds - float(other))
