import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from teletype import ErrorKind
from teletype.cleaning import clean
from teletype.kinds import KIND_COUNT, TOO_COMPLEX_KINDS, Mode, Reason
from teletype.privacy import audit_privacy
from teletype.records import (
    CORRUPT,
    LocCounts,
    OverallCounts,
    RecordError,
    RecordSchemaError,
    TelemetryRecord,
    parse_record,
    read_records,
    serialize_record,
)

NAMED = """TypeMismatch SyntaxError UnknownProperty OnlyTablesCanHaveMethods CannotExtendTable
TypesAreUnrelated CountMismatch IncorrectGenericParamCount CodeTooComplex GenericError ExtraInformation
CannotCallNonFunction CannotInferBinaryOperation DuplicateTypeDefinition FunctionDoesNotTakeSelf
FunctionExitsWithoutReturning IllegalRequire MissingProperties ModuleHasCyclicDependency NotATable
OccursCheckFailed OptionalValueAccess UnknownPropButFoundLikeProp UnknownRequire UnknownSymbol
MissingUnionProperty NormalizationTooComplex UnificationTooComplex""".split()

ZERO = LocCounts(0, 0, 0)


def rec(sid="000000000000001", ts=1000, mode=Mode.NONSTRICT, reason=Reason.KEYSTROKE, lines_edit=0,
        type_curr=ZERO, edit_kinds=None, server_ts=None, lines_total=10):
    return TelemetryRecord(
        session_id=sid,
        client_ts=ts,
        mode=mode,
        reason=reason,
        lines_total=lines_total,
        lines_edit=lines_edit,
        overall=OverallCounts(type_curr, ZERO, ZERO, ZERO, 0),
        edit_kinds=edit_kinds or {},
        server_ts=server_ts,
    )


def random_record(rng: random.Random) -> TelemetryRecord:
    def loc():
        total = rng.randint(0, 40)
        mod = rng.randint(0, total)
        return LocCounts(total, mod, rng.randint(0, mod))

    kinds = rng.sample(list(ErrorKind), rng.randint(0, 6))
    edit_kinds = {}
    for k in kinds:
        pair = (rng.randint(0, 5), rng.randint(0, 5))
        if pair != (0, 0):
            edit_kinds[k] = pair
    corrupt = rng.random() < 0.1
    return TelemetryRecord(
        session_id=f"{rng.randrange(10**15):015d}",
        client_ts=rng.randrange(1, 2 * 10**12),
        mode=rng.choice(list(Mode)),
        reason=rng.choice(list(Reason)),
        lines_total=rng.randint(0, 5000),
        lines_edit=CORRUPT if corrupt else rng.randint(0, 300),
        overall=OverallCounts(loc(), loc(), loc(), loc(), rng.randint(0, 9)),
        edit_kinds={} if corrupt else edit_kinds,
        server_ts=rng.choice([None, rng.randrange(1, 2 * 10**12)]),
    )


# -- taxonomy ----------------------------------------------------------------------


def test_taxonomy_has_35_tags_with_every_named_kind():
    assert KIND_COUNT == 35
    values = {k.value for k in ErrorKind}
    assert set(NAMED) <= values
    reserved = sorted(v for v in values if v.startswith("Reserved"))
    assert reserved == [f"Reserved{i:02d}" for i in range(1, 8)]


def test_alternate_spellings_alias_the_canonical_kinds():
    assert ErrorKind.lookup("UnknownPropButGotLikeProp") is ErrorKind.UnknownPropButFoundLikeProp
    assert ErrorKind.lookup("GenericExtraInformation") is ErrorKind.ExtraInformation
    with pytest.raises(ValueError):
        ErrorKind.lookup("NoSuchKind")


def test_too_complex_family():
    assert {k.value for k in TOO_COMPLEX_KINDS} == {
        "CodeTooComplex", "NormalizationTooComplex", "UnificationTooComplex"
    }


def test_modes_are_ordered():
    assert Mode.ordered() == [Mode.NOCHECK, Mode.NONSTRICT, Mode.STRICT]
    assert Mode.NOCHECK < Mode.NONSTRICT < Mode.STRICT


# -- serialization -----------------------------------------------------------------


def test_zero_record_serializes_with_zero_too_complex_and_empty_edit_kinds():
    line = serialize_record(rec())
    assert b'"too_complex":0' in line
    assert b'"edit_kinds":{}' in line
    assert b"\n" not in line


def _scalars(obj) -> int:
    if isinstance(obj, dict):
        return sum(_scalars(v) for v in obj.values())
    return 1


def test_shape_is_13_overall_scalars_plus_two_per_edit_kind():
    r = rec(type_curr=LocCounts(3, 2, 1), edit_kinds={ErrorKind.UnknownSymbol: (1, 0), ErrorKind.TypeMismatch: (0, 2)})
    obj = json.loads(serialize_record(r))
    assert _scalars(obj["overall"]) == 13
    assert _scalars(obj["edit_kinds"]) == 4


def test_invariant_violation_is_rejected_on_serialize():
    bad = rec(type_curr=LocCounts(1, 2, 0))
    with pytest.raises(RecordError):
        serialize_record(bad)
    with pytest.raises(RecordError):
        serialize_record(rec(edit_kinds={ErrorKind.UnknownSymbol: (0, 0)}))
    with pytest.raises(RecordError):
        serialize_record(rec(sid="123"))


def test_round_trip_on_1000_seeded_records():
    rng = random.Random(20240501)
    for _ in range(1000):
        r = random_record(rng)
        assert parse_record(serialize_record(r)) == r


def test_serialized_bytes_use_fixed_vocabulary_only():
    rng = random.Random(7)
    allowed_words = {
        "session_id", "client_ts_ms", "server_ts_ms", "mode", "reason", "lines_total", "lines_edit",
        "overall", "type_curr", "type_prev", "bg_curr", "bg_prev", "total", "module", "edit",
        "too_complex", "edit_kinds", "curr", "prev", "corrupt", "keystroke", "module_switch",
    } | {m.value for m in Mode} | {k.value for k in ErrorKind}
    for _ in range(200):
        text = serialize_record(random_record(rng)).decode()
        words = set(json.loads(text).keys())

        def walk(o):
            if isinstance(o, dict):
                for k, v in o.items():
                    words.add(k)
                    walk(v)
            elif isinstance(o, str) and not o.isdigit():
                words.add(o)

        walk(json.loads(text))
        assert words <= allowed_words


def test_empty_line_is_a_parse_error():
    with pytest.raises(RecordError):
        parse_record(b"")


def test_malformed_line_reports_offset():
    with pytest.raises(RecordError) as info:
        parse_record(b'{"session_id": 12,')
    assert info.value.offset > 0


def test_unknown_mode_is_a_schema_error():
    obj = json.loads(serialize_record(rec()))
    obj["mode"] = "loose"
    with pytest.raises(RecordSchemaError):
        parse_record(json.dumps(obj))


def test_unknown_field_and_unknown_kind_are_schema_errors():
    obj = json.loads(serialize_record(rec()))
    obj["source"] = "x"
    with pytest.raises(RecordSchemaError):
        parse_record(json.dumps(obj))
    obj = json.loads(serialize_record(rec()))
    obj["edit_kinds"] = {"MadeUpKind": {"curr": 1, "prev": 0}}
    with pytest.raises(RecordSchemaError):
        parse_record(json.dumps(obj))


def test_read_records_skips_blank_lines():
    a, b = rec(ts=1), rec(ts=2)
    data = serialize_record(a) + b"\n\n" + serialize_record(b) + b"\n"
    assert read_records(data.split(b"\n")) == [a, b]


@st.composite
def records(draw):
    return random_record(random.Random(draw(st.integers(0, 2**32))))


@settings(max_examples=200, deadline=None)
@given(records())
def test_round_trip_property(r):
    assert parse_record(serialize_record(r)) == r


# -- cleaning ----------------------------------------------------------------------


def test_duplicate_timestamp_keeps_first():
    r1 = rec(ts=1000, lines_total=1)
    r2 = rec(ts=1000, lines_total=2)
    r3 = rec(ts=1001, lines_total=3)
    assert clean([r1, r2, r3]) == [r1, r3]
    assert clean([]) == []


def test_negative_edit_range_voids_edit_fields_only():
    r = rec(lines_edit=-5, type_curr=LocCounts(7, 3, 1), edit_kinds={ErrorKind.UnknownSymbol: (1, 0)})
    (out,) = clean([r])
    assert out.lines_edit == CORRUPT and out.edit_corrupt
    assert out.edit_kinds == {}
    assert out.overall == r.overall
    assert out.overall.type_curr.total == 7
    assert parse_record(serialize_record(out)) == out


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 2), st.integers(0, 4), st.integers(-3, 3)), max_size=30))
def test_clean_is_idempotent_and_order_preserving(triples):
    rs = [rec(sid=f"{s:015d}", ts=t, lines_edit=e) for s, t, e in triples]
    once = clean(rs)
    assert clean(once) == once
    keys = [(r.session_id, r.client_ts) for r in once]
    assert len(keys) == len(set(keys))
    firsts = {}
    for r in rs:
        firsts.setdefault((r.session_id, r.client_ts), r)
    assert keys == [k for k in dict.fromkeys((r.session_id, r.client_ts) for r in rs)]
    for r in once:
        assert r.overall == firsts[r.session_id, r.client_ts].overall


# -- privacy -----------------------------------------------------------------------


def test_audit_passes_without_leak_and_flags_a_planted_one():
    line = serialize_record(rec())
    assert audit_privacy(line, {"PlayerInventory"}).passed
    res = audit_privacy(line + b"local x", {"local x", "zz"})
    assert not res.passed and res.offender == "local x"
    assert audit_privacy(line, set()).passed


def test_audit_ignores_short_strings():
    assert audit_privacy(b'{"mode":"strict"}', {"mod", "x"}).passed
