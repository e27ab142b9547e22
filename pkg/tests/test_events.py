import ipaddress
import json
import random

import pytest

from honeyflow.events import (
    BaselineAttack,
    FormatError,
    PacketEvent,
    ProtocolProfile,
    ScannerList,
    int_to_ipv4,
    ipv4_to_int,
    load_baseline,
    load_profiles,
    load_scanner_list,
    load_trace,
    normalize_prefix,
    parse_baseline_line,
    parse_event_line,
    prefix_net_mask,
    serialize_baseline,
    serialize_event,
    write_baseline,
    write_profiles,
    write_scanner_list,
    write_trace,
)


def test_ipv4_round_trip_against_ipaddress():
    rng = random.Random(11)
    for _ in range(300):
        value = rng.randrange(0, 2**32)
        text = int_to_ipv4(value)
        assert text == str(ipaddress.IPv4Address(value))
        assert ipv4_to_int(text) == value


@pytest.mark.parametrize(
    "bad",
    ["", "1.2.3", "1.2.3.4.5", "1.2.3.256", "01.2.3.4", "1.2.3.04", "a.b.c.d", "2001:db8::1", "1.2.3.-4"],
)
def test_ipv4_rejects(bad):
    with pytest.raises(ValueError):
        ipv4_to_int(bad)


def test_ipv6_error_names_the_problem():
    with pytest.raises(ValueError, match="IPv6"):
        ipv4_to_int("2001:db8::1")


def test_prefix_normalization():
    assert normalize_prefix("203.0.113.77/24") == "203.0.113.0/24"
    assert normalize_prefix("10.1.2.3/8") == "10.0.0.0/8"
    assert normalize_prefix("0.0.0.0/0") == "0.0.0.0/0"
    assert normalize_prefix("1.2.3.4/32") == "1.2.3.4/32"
    net, mask = prefix_net_mask("198.51.100.9/24")
    assert net == ipv4_to_int("198.51.100.0") and mask == 0xFFFFFF00
    for bad in ("1.2.3.4", "1.2.3.4/33", "1.2.3.4/x", "1.2.3.4/-1"):
        with pytest.raises(ValueError):
            prefix_net_mask(bad)


def sample_event(**overrides):
    fields = dict(ts=100.5, sensor="s1", src_ip="198.51.100.7", src_port=51515,
                  dst_ip="203.0.113.1", dst_port=123)
    fields.update(overrides)
    return PacketEvent(**fields)


def test_event_validation():
    sample_event()  # good one constructs
    with pytest.raises(ValueError):
        sample_event(ts=-1.0)
    with pytest.raises(ValueError):
        sample_event(ts=float("nan"))
    with pytest.raises(ValueError):
        sample_event(sensor="")
    with pytest.raises(ValueError):
        sample_event(src_ip="not-an-ip")
    with pytest.raises(ValueError, match="src_port out of range"):
        sample_event(src_port=70000)
    with pytest.raises(ValueError):
        sample_event(dst_port=-1)


def test_event_round_trip_property():
    rng = random.Random(23)
    for _ in range(200):
        event = PacketEvent(
            ts=rng.uniform(0, 1e9),
            sensor=f"s{rng.randrange(100):02d}",
            src_ip=int_to_ipv4(rng.randrange(2**32)),
            src_port=rng.randrange(65536),
            dst_ip=int_to_ipv4(rng.randrange(2**32)),
            dst_port=rng.randrange(65536),
        )
        assert parse_event_line(serialize_event(event), 1) == event


@pytest.mark.parametrize(
    "line,fragment",
    [
        ("{", "malformed"),
        ("[1,2]", "object"),
        ('{"ts": 1, "sensor": "a", "src_ip": "1.2.3.4", "src_port": 1, "dst_ip": "1.2.3.4"}', "missing key 'dst_port'"),
        ('{"ts": 1, "sensor": "a", "src_ip": "1.2.3.4", "src_port": 1, "dst_ip": "1.2.3.4", "dst_port": 5, "x": 1}', "unexpected key 'x'"),
        ('{"ts": -5, "sensor": "a", "src_ip": "1.2.3.4", "src_port": 1, "dst_ip": "1.2.3.4", "dst_port": 5}', "ts"),
        ('{"ts": 1, "sensor": "", "src_ip": "1.2.3.4", "src_port": 1, "dst_ip": "1.2.3.4", "dst_port": 5}', "sensor"),
        ('{"ts": 1, "sensor": "a", "src_ip": "1.2.3.4", "src_port": 99999, "dst_ip": "1.2.3.4", "dst_port": 5}', "src_port out of range"),
        ('{"ts": 1, "sensor": "a", "src_ip": "1.2.3.4", "src_port": 1.5, "dst_ip": "1.2.3.4", "dst_port": 5}', "src_port must be an integer"),
        ('{"ts": 1, "sensor": "a", "src_ip": "bogus", "src_port": 1, "dst_ip": "1.2.3.4", "dst_port": 5}', "src_ip"),
    ],
)
def test_event_parse_errors_name_field_and_line(line, fragment):
    with pytest.raises(FormatError) as err:
        parse_event_line(line, 3)
    assert fragment in str(err.value)
    assert "line 3" in str(err.value)


def test_load_trace_sorts_and_reports_line_numbers(tmp_path):
    events = [
        sample_event(ts=50.0, sensor="s2"),
        sample_event(ts=10.0, sensor="s9"),
        sample_event(ts=50.0, sensor="s1"),
    ]
    path = tmp_path / "events.jsonl"
    path.write_text("\n".join(serialize_event(e) for e in events) + "\n\n")
    loaded = load_trace(str(path))
    assert [e.ts for e in loaded] == [10.0, 50.0, 50.0]
    assert [e.sensor for e in loaded] == ["s9", "s1", "s2"]

    path.write_text('{"ts": 1}\n')
    with pytest.raises(FormatError, match="line 1"):
        load_trace(str(path))

    bad = serialize_event(events[0]) + "\n" + '{"nope": 1}' + "\n"
    path.write_text(bad)
    with pytest.raises(FormatError, match="line 2"):
        load_trace(str(path))


def test_trace_sort_is_stable_for_dst_ip_ties(tmp_path):
    # dst_ip is not part of the canonical order; ties keep file order
    first = sample_event(dst_ip="203.0.113.9")
    second = sample_event(dst_ip="203.0.113.1")
    path = tmp_path / "t.jsonl"
    write_trace([first, second], str(path))
    assert load_trace(str(path)) == [first, second]


def test_baseline_round_trip_and_normalization():
    record = BaselineAttack(
        start_ts=100.0,
        end_ts=200.0,
        protocols=frozenset({123, 53}),
        prefixes=frozenset({"203.0.113.99/24", "198.51.100.0/25"}),
    )
    assert record.prefixes == frozenset({"203.0.113.0/24", "198.51.100.0/25"})
    parsed = parse_baseline_line(serialize_baseline(record), 1)
    assert parsed == record


def test_baseline_validation_and_errors(tmp_path):
    with pytest.raises(ValueError):
        BaselineAttack(start_ts=5.0, end_ts=1.0, prefixes=frozenset({"1.2.3.0/24"}))
    with pytest.raises(ValueError):
        BaselineAttack(start_ts=0.0, end_ts=1.0, prefixes=frozenset())
    # portless is legal
    portless = BaselineAttack(start_ts=0.0, end_ts=1.0, prefixes=frozenset({"1.2.3.0/24"}))
    assert not portless.protocols

    path = tmp_path / "b.jsonl"
    path.write_text('{"start_ts": 1, "end_ts": 2, "protocols": [], "prefixes": ["1.2.3.4"]}\n')
    with pytest.raises(FormatError, match="line 1"):
        load_baseline(str(path))
    path.write_text('{"start_ts": 1, "end_ts": 2, "protocols": []}\n')
    with pytest.raises(FormatError, match="missing key 'prefixes'"):
        load_baseline(str(path))


def test_baseline_file_round_trip(tmp_path):
    records = [
        BaselineAttack(start_ts=50.0, end_ts=80.0, protocols=frozenset({123}),
                       prefixes=frozenset({"203.0.113.0/24"})),
        BaselineAttack(start_ts=10.0, end_ts=20.0, protocols=frozenset(),
                       prefixes=frozenset({"198.51.100.0/24"})),
    ]
    path = tmp_path / "baseline.jsonl"
    write_baseline(records, str(path))
    loaded = load_baseline(str(path))
    assert loaded == sorted(records, key=lambda b: b.start_ts)


def test_scanner_list_parsing(tmp_path):
    path = tmp_path / "scanners.txt"
    path.write_text("# telescope feed\n1.2.3.4\n\n5.6.7.8\n1.2.3.4\n")
    scanners = load_scanner_list(str(path), region_label="us")
    assert scanners.sources == frozenset({"1.2.3.4", "5.6.7.8"})
    assert scanners.region_label == "us"

    path.write_text("1.2.3.4 # trailing comments are not in the grammar\n")
    with pytest.raises(FormatError, match="line 1"):
        load_scanner_list(str(path))

    out = tmp_path / "out.txt"
    write_scanner_list(ScannerList(frozenset({"10.0.0.2", "2.0.0.1"}), region_label="eu"), str(out))
    assert out.read_text() == "# eu\n2.0.0.1\n10.0.0.2\n"


def test_profiles_round_trip_and_validation(tmp_path):
    profile = ProtocolProfile("NTP", 123, 13.0, 557.0, 2_300_000)
    path = tmp_path / "profiles.jsonl"
    write_profiles([profile], str(path))
    assert load_profiles(str(path)) == [profile]

    with pytest.raises(ValueError):
        ProtocolProfile("NTP", 123, 0.0, 557.0, 10)
    with pytest.raises(ValueError):
        ProtocolProfile("NTP", 123, 13.0, 557.0, 0)

    path.write_text('{"name": "x", "dst_port": 1, "request_size": 1, "amplification_factor": 1}\n')
    with pytest.raises(FormatError, match="missing key 'amplifier_count'"):
        load_profiles(str(path))
