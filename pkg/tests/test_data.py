import json

import pytest
from hypothesis import given, settings, strategies as st

from factories import record_line
from rumorgtb.data import (Dataset, Gender, Interaction, InteractionKind, Label,
                           MessageEvent, UserRecord, event_to_dict, load_dataset,
                           parse_event, save_dataset, serialize_event,
                           validate_dataset)
from rumorgtb.errors import (BadTimestamp, DatasetLoadError, DuplicateEventId,
                             MalformedRecord, MissingRequired)


def test_minimal_record_gets_defaults():
    e = parse_event(record_line())
    assert e.event_id == "e1"
    assert e.interactions == ()
    assert e.label is None
    assert e.user == UserRecord()
    assert e.user.gender is Gender.UNKNOWN
    assert (e.image_count, e.video_count, e.has_hyperlink) == (0, 0, False)


def test_interactions_sorted_on_parse():
    line = record_line(interactions=[{"kind": "comment", "t": 5},
                                     {"kind": "like", "t": 1},
                                     {"kind": "repost", "t": 3}])
    e = parse_event(line)
    assert [i.timestamp for i in e.interactions] == [1, 3, 5]
    assert [i.kind for i in e.interactions] == [InteractionKind.LIKE,
                                               InteractionKind.REPOST,
                                               InteractionKind.COMMENT]


@pytest.mark.parametrize("missing", ["event_id", "text", "post_time", "user"])
def test_missing_required(missing):
    obj = json.loads(record_line())
    del obj[missing]
    with pytest.raises(MissingRequired):
        parse_event(json.dumps(obj))


@pytest.mark.parametrize("bad", ['"yesterday"', "NaN", "Infinity", "true", "null"])
def test_bad_post_time(bad):
    line = '{"event_id": "e1", "text": "x", "user": {}, "post_time": %s}' % bad
    with pytest.raises((BadTimestamp, MissingRequired)):
        parse_event(line)


@pytest.mark.parametrize("line", ["not json", "[1, 2]", '{"event_id": "e"'])
def test_malformed(line):
    with pytest.raises(MalformedRecord):
        parse_event(line)


def test_negative_count_rejected():
    with pytest.raises(MalformedRecord):
        parse_event(record_line(user={"followers_count": -1}))


def test_label_and_unknown_keys():
    e = parse_event(record_line(label="Rumor", extra_field={"x": 1}))
    assert e.label is Label.RUMOR
    with pytest.raises(MalformedRecord):
        parse_event(record_line(label="maybe"))


def test_load_dataset(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text("\n".join(record_line(event_id=f"e{i}") for i in range(3)) + "\n",
                 encoding="utf-8")
    d = load_dataset(p)
    assert d.n == 3
    assert [e.event_id for e in d] == ["e0", "e1", "e2"]


def test_duplicate_event_id(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text(record_line() + "\n" + record_line() + "\n", encoding="utf-8")
    with pytest.raises(DuplicateEventId) as info:
        load_dataset(p)
    assert info.value.event_id == "e1"


def test_empty_file(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text("", encoding="utf-8")
    assert load_dataset(p).n == 0


def test_parse_errors_aggregated_with_line_numbers(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text("\n".join([record_line(event_id="a"), "oops",
                            record_line(event_id="b"), '{"text": "x"}']),
                 encoding="utf-8")
    with pytest.raises(DatasetLoadError) as info:
        load_dataset(p)
    assert [ln for ln, _ in info.value.problems] == [2, 4]


def test_missing_file(tmp_path):
    with pytest.raises(OSError):
        load_dataset(tmp_path / "nope.jsonl")


def test_loader_determinism(tmp_path):
    p = tmp_path / "d.jsonl"
    p.write_text("\n".join(record_line(event_id=f"e{i}", interactions=[
        {"kind": "like", "t": 9 - i}, {"kind": "comment", "t": i}]) for i in range(5)),
        encoding="utf-8")
    assert load_dataset(p) == load_dataset(p)


def _labeled(n):
    return Dataset(tuple(MessageEvent(f"e{i}", "x", 100, UserRecord(), label=Label.RUMOR)
                         for i in range(n)))


def test_validate_clean():
    r = validate_dataset(_labeled(10), require_labels=True)
    assert r.errors == [] and r.warnings == []


def test_validate_negative_time_span():
    d = Dataset((MessageEvent("e", "x", 100, UserRecord(registration_time=200),
                              label=Label.RUMOR),))
    r = validate_dataset(d)
    assert r.errors == []
    assert len(r.warnings) == 1 and "negative time span" in r.warnings[0]


def test_validate_unlabeled_and_dirty():
    d = Dataset((
        MessageEvent("a", "x", 100, UserRecord(), label=Label.RUMOR),
        MessageEvent("b", "x", 100, UserRecord(followers_count=1, bi_followers_count=5),
                     interactions=(Interaction(InteractionKind.LIKE, 50),)),
    ))
    r = validate_dataset(d, require_labels=True)
    assert len(r.errors) == 1
    assert len(r.warnings) == 2
    assert validate_dataset(d).errors == []


def test_validate_empty_and_no_mutation():
    assert validate_dataset(Dataset(())).errors
    d = _labeled(3)
    before = [event_to_dict(e) for e in d]
    validate_dataset(d, True)
    assert [event_to_dict(e) for e in d] == before


def test_save_load_round_trip(tmp_path):
    d = _labeled(4)
    save_dataset(d, tmp_path / "x.jsonl")
    assert load_dataset(tmp_path / "x.jsonl") == d


_text = st.text(max_size=30)
_count = st.integers(0, 10**9)
_time = st.integers(-10**10, 10**10)

users = st.builds(UserRecord, user_id=_text, user_name=_text, description=_text,
                  verified=st.booleans(), gender=st.sampled_from(list(Gender)),
                  city=_text, province=_text, location=_text,
                  registration_time=_time, friends_count=_count,
                  followers_count=_count, bi_followers_count=_count,
                  statuses_count=_count)
interactions = st.lists(st.builds(Interaction, st.sampled_from(list(InteractionKind)),
                                  _time), max_size=8)


@st.composite
def events(draw):
    inter = sorted(draw(interactions), key=lambda i: i.timestamp)
    return MessageEvent(event_id=draw(st.text(min_size=1, max_size=12)),
                        text=draw(_text), post_time=draw(_time), user=draw(users),
                        interactions=tuple(inter), image_count=draw(_count),
                        video_count=draw(_count), has_hyperlink=draw(st.booleans()),
                        label=draw(st.none() | st.sampled_from(list(Label))))


@settings(max_examples=150, deadline=None)
@given(events())
def test_serialize_round_trip(e):
    assert parse_event(serialize_event(e)) == e
