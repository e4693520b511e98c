"""UTC clock with an environment override for reproducible outputs.

Setting ``RUBRIC_FIXED_TIME`` to an ISO-8601 instant pins every timestamp the
package emits (job records, master objects, reports), which is what makes
golden-file tests and CLI-vs-service byte comparisons possible.
"""

from __future__ import annotations

import os
from datetime import datetime, timezone

FIXED_TIME_ENV = "RUBRIC_FIXED_TIME"


def parse_instant(text: str) -> datetime:
    """Parse an ISO-8601 instant; a trailing Z is accepted."""
    dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def now() -> datetime:
    fixed = os.environ.get(FIXED_TIME_ENV)
    if fixed:
        return parse_instant(fixed)
    return datetime.now(timezone.utc)


def isoformat(dt: datetime) -> str:
    """Canonical rendering: second precision unless sub-second info exists."""
    dt = dt.astimezone(timezone.utc)
    if dt.microsecond:
        return dt.isoformat().replace("+00:00", "Z")
    return dt.strftime("%Y-%m-%dT%H:%M:%SZ")
