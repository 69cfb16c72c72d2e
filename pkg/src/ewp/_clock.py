"""Wall-clock access. ``SOURCE_DATE_EPOCH`` pins both clocks for reproducible
output."""

from __future__ import annotations

import os
from datetime import datetime, timezone

_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)


def _pinned() -> datetime | None:
    raw = os.environ.get("SOURCE_DATE_EPOCH")
    if not raw:
        return None
    return datetime.fromtimestamp(int(raw), tz=timezone.utc)


def utc_now() -> datetime:
    return (_pinned() or datetime.now(timezone.utc)).replace(microsecond=0)


def local_now() -> datetime:
    """Naive local time. Pinned time is taken as UTC so output does not depend
    on the host time zone."""
    pinned = _pinned()
    if pinned is not None:
        return pinned.replace(tzinfo=None)
    return datetime.now().replace(microsecond=0)


def format_stamp(moment: datetime) -> str:
    """``19 November 2011 05:34 PM``, independent of locale."""
    hour = moment.hour % 12 or 12
    ampm = "AM" if moment.hour < 12 else "PM"
    return f"{moment.day} {_MONTHS[moment.month - 1]} {moment.year} {hour:02d}:{moment.minute:02d} {ampm}"
