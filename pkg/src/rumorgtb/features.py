"""Turn message events into fixed-order numeric feature rows.

A row is ``(constant features; changing features)``. Constant features are
fixed when the message is posted (text statistics, author profile). Changing
features are interaction counts that grow while the message spreads and are
read off at a detecting deadline ``T`` hours after posting.
"""

import bisect
import csv
import math
import re
import zlib
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from .data import Dataset, Gender, InteractionKind, Label, MessageEvent
from .errors import DataError, EmptyDataset, NegativeDeadline, SchemaMismatch

SECONDS_PER_HOUR = 3600
SECONDS_PER_DAY = 86400

ALL = math.inf  # deadline covering the entire interaction history

SELECTED_CONSTANT = (
    "TimeSpan", "MessageLength", "QuestionMarks", "Exclamations", "Quotes",
    "Brackets", "FirstPersonPronouns", "SecondPersonPronouns",
    "ThirdPersonPronouns", "AtMentions", "Topics", "Dates", "Digits", "Emoji",
    "FriendsCount", "FollowersCount", "BiFollowersCount", "RegistrationTime",
    "AllMessagesCount", "UserInfluence",
)
EXTRA_CONSTANT = (
    "UserIdLength", "UserNameLength", "DescriptionLength", "City", "Province",
    "Verified", "ImageCount", "VideoCount", "Gender", "Location", "Hyperlink",
)
CHANGING = ("Comments", "Reposts", "Likes")

_CHANGING_KIND = {
    "Comments": InteractionKind.COMMENT,
    "Reposts": InteractionKind.REPOST,
    "Likes": InteractionKind.LIKE,
}
_KNOWN_CONSTANT = frozenset(SELECTED_CONSTANT + EXTRA_CONSTANT)


@dataclass(frozen=True)
class FeatureSchema:
    """Ordered feature names, constant features first."""

    names: tuple

    def __post_init__(self):
        names = tuple(self.names)
        object.__setattr__(self, "names", names)
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate feature names in schema")
        unknown = [n for n in names if n not in _KNOWN_CONSTANT and n not in _CHANGING_KIND]
        if unknown:
            raise SchemaMismatch(f"unknown feature names: {unknown}")
        seen_changing = False
        for n in names:
            if n in _CHANGING_KIND:
                seen_changing = True
            elif seen_changing:
                raise SchemaMismatch("constant features must precede changing features")

    @property
    def constant_count(self):
        return sum(1 for n in self.names if n not in _CHANGING_KIND)

    @property
    def changing_count(self):
        return len(self.names) - self.constant_count

    @property
    def total(self):
        return len(self.names)

    def subset(self, indices):
        """Schema of the given columns, re-ordered so constants come first."""
        picked = [self.names[i] for i in indices]
        return FeatureSchema(tuple(n for n in picked if n not in _CHANGING_KIND)
                             + tuple(n for n in picked if n in _CHANGING_KIND))


SELECTED_SCHEMA = FeatureSchema(SELECTED_CONSTANT + CHANGING)
CANDIDATE_SCHEMA = FeatureSchema(SELECTED_CONSTANT + EXTRA_CONSTANT + CHANGING)

SCHEMAS = {"selected": SELECTED_SCHEMA, "all34": CANDIDATE_SCHEMA}


def get_schema(schema):
    if isinstance(schema, FeatureSchema):
        return schema
    if isinstance(schema, str):
        try:
            return SCHEMAS[schema]
        except KeyError:
            raise SchemaMismatch(f"unknown schema {schema!r}; "
                                 f"choose from {sorted(SCHEMAS)}") from None
    return FeatureSchema(tuple(schema))


@dataclass(frozen=True)
class Lexicon:
    first_person: tuple = ("我", "我们", "咱", "咱们", "俺", "俺们")
    second_person: tuple = ("你", "你们", "您", "妳")
    third_person: tuple = ("他", "她", "它", "他们", "她们", "它们")
    quotes: str = "\"'“”‘’「」『』＂＇"
    open_brackets: str = "([{（［｛【"


DEFAULT_LEXICON = Lexicon()

_SHORTCODE_RE = re.compile(r"\[[^\[\]]{1,8}\]")
_EMOJI_RE = re.compile(
    "[\U0001F000-\U0001FAFF\u2600-\u27BF\u2B50\u2B55\u231A\u231B\u23E9-\u23FA]")
_FULLWIDTH_DIGITS = str.maketrans("０１２３４５６７８９", "0123456789")
_M = r"(?:0?[1-9]|1[0-2])"
_D = r"(?:0?[1-9]|[12]\d|3[01])"
_DATE_RE = re.compile(
    r"(?<!\d)(?:"
    rf"\d{{4}}年{_M}月{_D}日"
    rf"|\d{{4}}-{_M}-{_D}(?!\d)"
    rf"|{_M}月{_D}[日号]"
    rf"|{_M}-{_D}(?![\d-])"
    r")")


def _pronoun_counts(text, lexicon):
    table = {}
    for cls, words in enumerate((lexicon.first_person, lexicon.second_person,
                                 lexicon.third_person)):
        for w in words:
            table[w] = cls
    lengths = sorted({len(w) for w in table}, reverse=True)
    counts = [0, 0, 0]
    i = 0
    n = len(text)
    while i < n:
        for size in lengths:
            cls = table.get(text[i:i + size])
            if cls is not None:
                counts[cls] += 1
                i += size
                break
        else:
            i += 1
    return counts


def count_dates(text):
    return len(_DATE_RE.findall(text.translate(_FULLWIDTH_DIGITS)))


def count_digits(text):
    return sum(1 for ch in text if "0" <= ch <= "9" or "０" <= ch <= "９")


def user_influence(user):
    """``ln((max(followers - bi_followers, 0) + 1) / (friends + 1))``.

    Shifted and clamped so the log stays finite on dirty counts.
    """
    reach = max(user.followers_count - user.bi_followers_count, 0)
    return math.log((reach + 1) / (user.friends_count + 1))


def _stable_bucket(s):
    return zlib.crc32(s.encode("utf-8"))


_GENDER_CODE = {Gender.UNKNOWN: 0, Gender.MALE: 1, Gender.FEMALE: 2}


def constant_feature_values(e, lexicon=DEFAULT_LEXICON):
    """All known constant features of one event, keyed by name."""
    text = e.text
    u = e.user
    without_codes, n_codes = _SHORTCODE_RE.subn("", text)
    first, second, third = _pronoun_counts(text, lexicon)
    return {
        "TimeSpan": (e.post_time - u.registration_time) / SECONDS_PER_HOUR,
        "MessageLength": len(text.strip()),
        "QuestionMarks": text.count("?") + text.count("？"),
        "Exclamations": text.count("!") + text.count("！"),
        "Quotes": sum(1 for ch in text if ch in lexicon.quotes),
        "Brackets": sum(1 for ch in without_codes if ch in lexicon.open_brackets),
        "FirstPersonPronouns": first,
        "SecondPersonPronouns": second,
        "ThirdPersonPronouns": third,
        "AtMentions": text.count("@"),
        "Topics": text.count("#") // 2,
        "Dates": count_dates(text),
        "Digits": count_digits(text),
        "Emoji": n_codes + len(_EMOJI_RE.findall(without_codes)),
        "FriendsCount": u.friends_count,
        "FollowersCount": u.followers_count,
        "BiFollowersCount": u.bi_followers_count,
        "RegistrationTime": u.registration_time / SECONDS_PER_DAY,
        "AllMessagesCount": u.statuses_count,
        "UserInfluence": user_influence(u),
        "UserIdLength": len(u.user_id),
        "UserNameLength": len(u.user_name),
        "DescriptionLength": len(u.description),
        "City": _stable_bucket(u.city),
        "Province": _stable_bucket(u.province),
        "Verified": int(u.verified),
        "ImageCount": e.image_count,
        "VideoCount": e.video_count,
        "Gender": _GENDER_CODE[u.gender],
        "Location": _stable_bucket(u.location),
        "Hyperlink": int(e.has_hyperlink),
    }


def extract_constant_features(e, schema=SELECTED_SCHEMA, lexicon=DEFAULT_LEXICON):
    schema = get_schema(schema)
    values = constant_feature_values(e, lexicon)
    return np.array([values[n] for n in schema.names[:schema.constant_count]],
                    dtype=np.float64)


def parse_deadline(value):
    """Hours as a float; ``"all"`` (or ``inf``) means full history."""
    if isinstance(value, str):
        v = value.strip().lower()
        if v in ("all", "inf", "infinity"):
            return ALL
        try:
            value = float(v)
        except ValueError:
            raise NegativeDeadline(f"deadline must be hours >= 0 or 'all', got {value!r}") from None
    value = float(value)
    if math.isnan(value) or value < 0:
        raise NegativeDeadline(f"deadline must be >= 0, got {value}")
    return value


def format_deadline(T):
    T = float(T)
    if math.isinf(T):
        return "all"
    return str(int(T)) if T.is_integer() else repr(T)


def count_changing(e, kind, T):
    """Interactions of ``kind`` in ``[post_time, post_time + 3600*T]``."""
    T = parse_deadline(T)
    kind = InteractionKind(kind)
    stamps = [i.timestamp for i in e.interactions if i.kind is kind]
    lo = bisect.bisect_left(stamps, e.post_time)
    if math.isinf(T):
        return len(stamps) - lo
    hi = bisect.bisect_right(stamps, e.post_time + SECONDS_PER_HOUR * T)
    return max(hi - lo, 0)


def extract_row(e, T, schema=SELECTED_SCHEMA, lexicon=DEFAULT_LEXICON):
    schema = get_schema(schema)
    T = parse_deadline(T)
    const = constant_feature_values(e, lexicon)
    row = [const[n] if n in const else count_changing(e, _CHANGING_KIND[n], T)
           for n in schema.names]
    return np.array(row, dtype=np.float64)


@dataclass(frozen=True)
class FeatureMatrix:
    values: np.ndarray
    schema: FeatureSchema
    deadline_hours: float
    labels: tuple | None = None
    event_ids: tuple = ()

    @property
    def n(self):
        return self.values.shape[0]

    @property
    def y(self):
        """Labels as an object array of :class:`Label`."""
        if self.labels is None:
            return None
        return np.array(self.labels, dtype=object)

    def select(self, indices):
        """Matrix restricted to the given columns (constants kept first)."""
        schema = self.schema.subset(indices)
        cols = [self.schema.names.index(n) for n in schema.names]
        return FeatureMatrix(self.values[:, cols], schema, self.deadline_hours,
                             self.labels, self.event_ids)


def _events(d):
    if isinstance(d, Dataset):
        return d.events
    if isinstance(d, MessageEvent):
        return (d,)
    return tuple(d)


def materialize(d, T=ALL, schema=SELECTED_SCHEMA, lexicon=DEFAULT_LEXICON):
    """Feature matrix of a dataset at deadline ``T`` hours."""
    events = _events(d)
    if not events:
        raise EmptyDataset("cannot materialize features of an empty dataset")
    schema = get_schema(schema)
    T = parse_deadline(T)
    values = np.vstack([extract_row(e, T, schema, lexicon) for e in events])
    if not np.isfinite(values).all():
        raise DataError("non-finite feature value produced")
    labels = None
    if all(e.label is not None for e in events):
        labels = tuple(e.label for e in events)
    return FeatureMatrix(values, schema, T, labels,
                         tuple(e.event_id for e in events))


def write_feature_table(fm, path):
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        header = list(fm.schema.names)
        if fm.labels is not None:
            header.append("label")
        w.writerow(header)
        for i, row in enumerate(fm.values):
            cells = [repr(float(v)) for v in row]
            if fm.labels is not None:
                cells.append(fm.labels[i].value)
            w.writerow(cells)


def read_feature_table(path, deadline_hours=ALL):
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    has_label = header[-1] == "label"
    names = header[:-1] if has_label else header
    width = len(names)
    values = np.array([[float(c) for c in r[:width]] for r in body],
                      dtype=np.float64).reshape(len(body), width)
    labels = tuple(Label(r[-1]) for r in body) if has_label else None
    return FeatureMatrix(values, FeatureSchema(tuple(names)), deadline_hours, labels)


class DeadlineFeatureExtractor(TransformerMixin, BaseEstimator):
    """Transformer from message events to a feature matrix at a deadline.

    Parameters
    ----------
    deadline : float or "all", default="all"
        Hours after posting at which interaction counts are read.
    schema : {"selected", "all34"} or sequence of feature names
    lexicon : Lexicon, optional
    """

    def __init__(self, deadline="all", schema="selected", lexicon=None):
        self.deadline = deadline
        self.schema = schema
        self.lexicon = lexicon

    def fit(self, X=None, y=None):
        self.schema_ = get_schema(self.schema)
        self.deadline_ = parse_deadline(self.deadline)
        self.n_features_out_ = self.schema_.total
        return self

    def transform(self, X):
        # stateless: parameters are read directly so an unfitted instance works
        return materialize(X, parse_deadline(self.deadline), get_schema(self.schema),
                           self.lexicon or DEFAULT_LEXICON).values

    def get_feature_names_out(self, input_features=None):
        return np.array(get_schema(self.schema).names, dtype=object)
