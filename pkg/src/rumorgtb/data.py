"""Event records, labels, and the line-delimited JSON dataset format.

One line holds one event::

    {"event_id": "e1", "text": "...", "post_time": 1300000000,
     "user": {"followers_count": 10, ...},
     "interactions": [{"kind": "comment", "t": 1300000100}],
     "label": "rumor"}

Times are integer UTC seconds. ``event_id``, ``text``, ``post_time`` and
``user`` are required; everything else falls back to a neutral default.
Unknown keys are ignored.
"""

import json
import math
from dataclasses import dataclass, field
from enum import Enum

from .errors import (BadTimestamp, DatasetLoadError, DuplicateEventId,
                     MalformedRecord, MissingRequired)


class Label(str, Enum):
    RUMOR = "rumor"
    NONRUMOR = "nonrumor"

    @classmethod
    def coerce(cls, value):
        """Accept a Label, its string value (any case), or a bool/0-1 int
        meaning "is rumor"."""
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls(value.strip().lower())
            except ValueError:
                raise MalformedRecord(f"unknown label {value!r}") from None
        if isinstance(value, (bool, int)) or hasattr(value, "item"):
            v = value.item() if hasattr(value, "item") else value
            if v in (0, 1):
                return cls.RUMOR if v == 1 else cls.NONRUMOR
        raise MalformedRecord(f"unknown label {value!r}")


class Gender(str, Enum):
    MALE = "m"
    FEMALE = "f"
    UNKNOWN = "unknown"


class InteractionKind(str, Enum):
    COMMENT = "comment"
    REPOST = "repost"
    LIKE = "like"


@dataclass(frozen=True)
class UserRecord:
    user_id: str = ""
    user_name: str = ""
    description: str = ""
    verified: bool = False
    gender: Gender = Gender.UNKNOWN
    city: str = ""
    province: str = ""
    location: str = ""
    registration_time: int = 0
    friends_count: int = 0
    followers_count: int = 0
    bi_followers_count: int = 0
    statuses_count: int = 0


@dataclass(frozen=True)
class Interaction:
    kind: InteractionKind
    timestamp: int


@dataclass(frozen=True)
class MessageEvent:
    event_id: str
    text: str
    post_time: int
    user: UserRecord
    interactions: tuple = ()
    image_count: int = 0
    video_count: int = 0
    has_hyperlink: bool = False
    label: Label | None = None


@dataclass(frozen=True)
class Dataset:
    events: tuple = ()

    @property
    def n(self):
        return len(self.events)

    def __len__(self):
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    @property
    def labels(self):
        return [e.label for e in self.events]

    @property
    def is_labeled(self):
        return all(e.label is not None for e in self.events)


@dataclass
class ValidationReport:
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors


_COUNT_FIELDS = ("friends_count", "followers_count", "bi_followers_count",
                 "statuses_count")
_TEXT_FIELDS = ("user_id", "user_name", "description", "city", "province",
                "location")


def _timestamp(value, what):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise BadTimestamp(f"{what} must be a number, got {value!r}")
    if isinstance(value, float):
        if not math.isfinite(value):
            raise BadTimestamp(f"{what} is not finite: {value!r}")
        if value.is_integer():
            return int(value)
    return value


def _count(value, what):
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if isinstance(value, bool) or not isinstance(value, int):
        raise MalformedRecord(f"{what} must be an integer, got {value!r}")
    if value < 0:
        raise MalformedRecord(f"{what} must be >= 0, got {value}")
    return value


def _text(value, what):
    if value is None:
        return ""
    if not isinstance(value, str):
        # ids sometimes arrive as numbers
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return str(value)
        raise MalformedRecord(f"{what} must be a string, got {value!r}")
    return value


def _flag(value, what):
    if value is None:
        return False
    if isinstance(value, bool):
        return value
    if value in (0, 1):
        return bool(value)
    raise MalformedRecord(f"{what} must be a boolean, got {value!r}")


def _parse_user(obj):
    if not isinstance(obj, dict):
        raise MalformedRecord("user must be an object")
    kw = {}
    for name in _TEXT_FIELDS:
        if name in obj:
            kw[name] = _text(obj[name], f"user.{name}")
    for name in _COUNT_FIELDS:
        if obj.get(name) is not None:
            kw[name] = _count(obj[name], f"user.{name}")
    if obj.get("verified") is not None:
        kw["verified"] = _flag(obj["verified"], "user.verified")
    if obj.get("registration_time") is not None:
        kw["registration_time"] = _timestamp(obj["registration_time"],
                                             "user.registration_time")
    g = obj.get("gender")
    if g is not None:
        try:
            kw["gender"] = Gender(str(g).strip().lower())
        except ValueError:
            kw["gender"] = Gender.UNKNOWN
    return UserRecord(**kw)


def _parse_interaction(obj):
    if not isinstance(obj, dict):
        raise MalformedRecord("interaction must be an object")
    try:
        kind = InteractionKind(str(obj.get("kind", "")).strip().lower())
    except ValueError:
        raise MalformedRecord(f"unknown interaction kind {obj.get('kind')!r}") from None
    if "t" not in obj:
        raise MissingRequired("interaction lacks 't'")
    return Interaction(kind, _timestamp(obj["t"], "interaction.t"))


def event_from_dict(obj):
    if not isinstance(obj, dict):
        raise MalformedRecord("record must be a JSON object")
    for key in ("event_id", "text", "post_time", "user"):
        if key not in obj or obj[key] is None:
            raise MissingRequired(f"missing required field {key!r}")
    event_id = _text(obj["event_id"], "event_id")
    if not event_id:
        raise MissingRequired("event_id is empty")
    if not isinstance(obj["text"], str):
        raise MalformedRecord("text must be a string")

    raw = obj.get("interactions") or []
    if not isinstance(raw, list):
        raise MalformedRecord("interactions must be an array")
    interactions = sorted((_parse_interaction(i) for i in raw),
                          key=lambda i: i.timestamp)

    label = obj.get("label")
    return MessageEvent(
        event_id=event_id,
        text=obj["text"],
        post_time=_timestamp(obj["post_time"], "post_time"),
        user=_parse_user(obj["user"]),
        interactions=tuple(interactions),
        image_count=_count(obj.get("image_count") or 0, "image_count"),
        video_count=_count(obj.get("video_count") or 0, "video_count"),
        has_hyperlink=_flag(obj.get("has_hyperlink"), "has_hyperlink"),
        label=None if label is None else Label.coerce(label),
    )


def parse_event(line):
    """Parse one JSON line into a :class:`MessageEvent`."""
    try:
        obj = json.loads(line)
    except (json.JSONDecodeError, TypeError) as exc:
        raise MalformedRecord(f"not valid JSON: {exc}") from None
    return event_from_dict(obj)


def event_to_dict(e):
    u = e.user
    out = {
        "event_id": e.event_id,
        "text": e.text,
        "post_time": e.post_time,
        "image_count": e.image_count,
        "video_count": e.video_count,
        "has_hyperlink": e.has_hyperlink,
        "user": {
            "user_id": u.user_id,
            "user_name": u.user_name,
            "description": u.description,
            "verified": u.verified,
            "gender": u.gender.value,
            "city": u.city,
            "province": u.province,
            "location": u.location,
            "registration_time": u.registration_time,
            "friends_count": u.friends_count,
            "followers_count": u.followers_count,
            "bi_followers_count": u.bi_followers_count,
            "statuses_count": u.statuses_count,
        },
        "interactions": [{"kind": i.kind.value, "t": i.timestamp}
                         for i in e.interactions],
    }
    if e.label is not None:
        out["label"] = e.label.value
    return out


def serialize_event(e):
    return json.dumps(event_to_dict(e), ensure_ascii=False, allow_nan=False)


def load_dataset(path):
    """Read a dataset file, one event per non-blank line.

    Parse failures are collected over the whole file and raised together as
    :class:`DatasetLoadError`; a repeated ``event_id`` raises
    :class:`DuplicateEventId`.
    """
    events = []
    problems = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                events.append(parse_event(line))
            except MalformedRecord as exc:
                problems.append((lineno, exc))
    if problems:
        raise DatasetLoadError(path, problems)
    seen = set()
    for e in events:
        if e.event_id in seen:
            raise DuplicateEventId(e.event_id)
        seen.add(e.event_id)
    return Dataset(tuple(events))


def save_dataset(dataset, path):
    with open(path, "w", encoding="utf-8") as fh:
        for e in dataset.events:
            fh.write(serialize_event(e))
            fh.write("\n")


def validate_dataset(d, require_labels=False):
    report = ValidationReport()
    if d.n == 0:
        report.errors.append("dataset has no events")
    seen = set()
    for e in d.events:
        if e.event_id in seen:
            report.errors.append(f"{e.event_id}: duplicate event_id")
        seen.add(e.event_id)
        if require_labels and e.label is None:
            report.errors.append(f"{e.event_id}: unlabeled event")
        u = e.user
        if u.bi_followers_count > u.followers_count:
            report.warnings.append(
                f"{e.event_id}: bi_followers_count exceeds followers_count")
        if u.registration_time > e.post_time:
            report.warnings.append(
                f"{e.event_id}: registration after post_time (negative time span)")
        early = sum(1 for i in e.interactions if i.timestamp < e.post_time)
        if early:
            report.warnings.append(
                f"{e.event_id}: {early} interaction(s) before post_time")
    return report
