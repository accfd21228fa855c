"""Synthetic event corpora with known labelling rules.

The generators mimic the shape of microblog data closely enough to exercise
the whole pipeline end to end; they make no claim to realism.
"""

import numpy as np

from .data import (Dataset, Gender, Interaction, InteractionKind, Label,
                   MessageEvent, UserRecord)

HOUR = 3600
BASE_TIME = 1_300_000_000

_FILLER = "今天天气新闻消息听说城市朋友大家关注事件现场视频图片真的假的网友转发"


def _filler(rng, size):
    return "".join(rng.choice(list(_FILLER), size=size))


def _user(rng, followers=None):
    followers = int(rng.integers(0, 50_000)) if followers is None else int(followers)
    return UserRecord(
        user_id=str(int(rng.integers(10**6, 10**10))),
        user_name=_filler(rng, int(rng.integers(2, 8))),
        description=_filler(rng, int(rng.integers(0, 20))),
        verified=bool(rng.random() < 0.3),
        gender=[Gender.MALE, Gender.FEMALE, Gender.UNKNOWN][int(rng.integers(0, 3))],
        city=_filler(rng, 2),
        province=_filler(rng, 2),
        location=_filler(rng, 4),
        registration_time=BASE_TIME - int(rng.integers(HOUR, 2000 * 24 * HOUR)),
        friends_count=int(rng.integers(0, 2000)),
        followers_count=followers,
        bi_followers_count=int(rng.integers(0, min(followers, 500) + 1)),
        statuses_count=int(rng.integers(0, 20_000)),
    )


def _noise_interactions(rng, post_time, kinds=(InteractionKind.REPOST, InteractionKind.LIKE)):
    out = []
    for kind in kinds:
        for _ in range(int(rng.integers(0, 6))):
            out.append(Interaction(kind, post_time + int(rng.integers(60, 48 * HOUR))))
    return out


def make_synthetic_corpus(n=400, seed=0):
    """Events labelled by a fixed rule on three features.

    An event is a rumor iff it has at least 2 question marks, or its author
    has fewer than 1000 followers and its text holds at least 3 digits.
    Every other feature is noise drawn independently of the label.
    """
    rng = np.random.default_rng(seed)
    events = []
    for i in range(n):
        q = int(rng.integers(0, 4))
        digits = int(rng.integers(0, 6))
        followers = int(rng.integers(0, 2000)) if rng.random() < 0.5 else int(rng.integers(0, 50_000))
        rumor = q >= 2 or (followers < 1000 and digits >= 3)
        text = (_filler(rng, int(rng.integers(5, 60)))
                + "".join(rng.choice(list("0123456789"), size=digits))
                + "？" * q
                + "！" * int(rng.integers(0, 3)))
        post_time = BASE_TIME + int(rng.integers(0, 365 * 24 * HOUR))
        interactions = _noise_interactions(
            rng, post_time, (InteractionKind.COMMENT, InteractionKind.REPOST,
                             InteractionKind.LIKE))
        events.append(MessageEvent(
            event_id=f"s{i:05d}", text=text, post_time=post_time,
            user=_user(rng, followers),
            interactions=tuple(sorted(interactions, key=lambda x: x.timestamp)),
            image_count=int(rng.integers(0, 4)), video_count=int(rng.integers(0, 2)),
            has_hyperlink=bool(rng.random() < 0.4),
            label=Label.RUMOR if rumor else Label.NONRUMOR))
    return Dataset(tuple(events))


def make_early_detection_corpus(n=200, seed=0):
    """Events labelled by comment volume in the first 4 hours.

    Rumors receive 8 to 12 comments within 4 hours of posting, non-rumors 0 to
    2. Every event then receives exactly 3 more comments between 5 and 20
    hours. No interaction is stamped exactly at posting time, so at deadline
    0 the label is independent of every feature.
    """
    rng = np.random.default_rng(seed)
    events = []
    for i in range(n):
        rumor = i % 2 == 0
        post_time = BASE_TIME + int(rng.integers(0, 365 * 24 * HOUR))
        early = int(rng.integers(8, 13)) if rumor else int(rng.integers(0, 3))
        stamps = [post_time + int(rng.integers(60, 4 * HOUR + 1)) for _ in range(early)]
        stamps += [post_time + int(rng.integers(5 * HOUR, 20 * HOUR)) for _ in range(3)]
        interactions = [Interaction(InteractionKind.COMMENT, t) for t in stamps]
        interactions += _noise_interactions(rng, post_time)
        events.append(MessageEvent(
            event_id=f"t{i:05d}", text=_filler(rng, int(rng.integers(5, 60))),
            post_time=post_time, user=_user(rng),
            interactions=tuple(sorted(interactions, key=lambda x: x.timestamp)),
            label=Label.RUMOR if rumor else Label.NONRUMOR))
    return Dataset(tuple(events))


def make_feature_matrix(n=5000, d=23, seed=0):
    """Random ``(X, y)`` with a nonlinear labelling rule, for timing runs."""
    rng = np.random.default_rng(seed)
    X = rng.random((n, d))
    X[:, : d // 2] = np.round(X[:, : d // 2] * 50)
    score = X[:, 0] / 50 + X[:, d - 1] - 0.5 * X[:, 1] / 50 * X[:, d - 2]
    classes = np.array([Label.RUMOR, Label.NONRUMOR], dtype=object)
    y = classes[np.where(score + 0.1 * rng.standard_normal(n) > 0.6, 0, 1)]
    return X, y
