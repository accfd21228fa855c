import json

from rumorgtb.data import (Interaction, InteractionKind, Label, MessageEvent,
                           UserRecord)

HOUR = 3600


def make_event(event_id="e1", text="hi", post_time=0, label=None, user=None,
               interactions=(), **kw):
    return MessageEvent(event_id=event_id, text=text, post_time=post_time,
                        user=user or UserRecord(),
                        interactions=tuple(sorted(interactions, key=lambda i: i.timestamp)),
                        label=label, **kw)


def comments_at(post_time, hours, kind=InteractionKind.COMMENT):
    return [Interaction(kind, post_time + int(h * HOUR)) for h in hours]


def record_line(**fields):
    obj = {"event_id": "e1", "text": "hi", "post_time": 0, "user": {}}
    obj.update(fields)
    return json.dumps(obj, ensure_ascii=False)


def separable_events():
    """Two rumors and two non-rumors split by follower count."""
    out = []
    for i, (followers, label) in enumerate([(10, Label.RUMOR), (20, Label.RUMOR),
                                            (5000, Label.NONRUMOR), (9000, Label.NONRUMOR)]):
        out.append(make_event(f"e{i}", text=f"消息{i}", post_time=1000,
                              user=UserRecord(followers_count=followers), label=label))
    return out
