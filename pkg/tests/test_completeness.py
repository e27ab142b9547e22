import json

import pytest

from honeyflow import BaselineAttack, PacketEvent, ScannerList, trace_sort_key
from honeyflow.completeness import (
    CLASS_ATTACK,
    CLASS_SCAN_ONLY,
    CLASS_UNSEEN,
    classify_sources,
    match_baseline,
    overlap_report,
    report_to_dict,
    upper_bound,
    write_class_shares_csv,
    write_overlap_json,
    write_source_classes_csv,
    write_venn_csv,
)
from honeyflow.detection import PRESETS, detect_attacks
from honeyflow.synth import AttackSpec, ScanSpec, ScenarioSpec, synth


def burst(src, n, *, t0=0.0, dt=1.0, sensor="s1", dport=123):
    return [
        PacketEvent(t0 + i * dt, sensor, src, 50000, "192.0.2.1", dport) for i in range(n)
    ]


def ccc_attacks(events):
    return detect_attacks(sorted(events, key=trace_sort_key), PRESETS["ccc"])


def record(start, end, protocols, prefixes):
    return BaselineAttack(
        start_ts=start, end_ts=end,
        protocols=frozenset(protocols),
        prefixes=frozenset(prefixes),
    )


def test_match_requires_port_prefix_and_time():
    attacks = ccc_attacks(burst("203.0.113.9", 10, t0=100.0))
    hit = record(50.0, 200.0, {123}, {"203.0.113.0/24"})
    assert match_baseline(attacks, [hit]).matched_with_ports == 1

    wrong_port = record(50.0, 200.0, {53}, {"203.0.113.0/24"})
    wrong_prefix = record(50.0, 200.0, {123}, {"198.51.100.0/24"})
    too_early = record(0.0, 99.0, {123}, {"203.0.113.0/24"})
    for miss in (wrong_port, wrong_prefix, too_early):
        assert match_baseline(attacks, [miss]).matched_with_ports == 0


def test_match_window_is_closed_and_slack_widens():
    attacks = ccc_attacks(burst("203.0.113.9", 10, t0=100.0))  # spans [100, 109]
    touching = record(109.0, 300.0, {123}, {"203.0.113.0/24"})
    assert match_baseline(attacks, [touching]).matched_with_ports == 1

    near = record(119.0, 300.0, {123}, {"203.0.113.0/24"})
    assert match_baseline(attacks, [near]).matched_with_ports == 0
    assert match_baseline(attacks, [near], slack_s=10.0).matched_with_ports == 1
    with pytest.raises(ValueError):
        match_baseline(attacks, [near], slack_s=-1.0)


def test_prefix_victims_match_by_containment():
    attacks = detect_attacks(burst("203.0.113.9", 10), PRESETS["newkid-mono"])
    assert attacks[0].victim.identity == "203.0.113.0/24"
    wider = record(0.0, 50.0, {123}, {"203.0.0.0/16"})
    assert match_baseline(attacks, [wider]).matched_with_ports == 1
    narrower = record(0.0, 50.0, {123}, {"203.0.113.0/25"})
    assert match_baseline(attacks, [narrower]).matched_with_ports == 0


def test_portless_records_tallied_separately():
    attacks = ccc_attacks(burst("203.0.113.9", 10))
    portless = record(0.0, 50.0, set(), {"203.0.113.0/24"})
    portful = record(0.0, 50.0, {123}, {"203.0.113.0/24"})
    report = match_baseline(attacks, [portless, portful])
    assert report.portless_total == 1 and report.portless_matched == 1
    assert report.baseline_with_ports == 1 and report.matched_with_ports == 1
    # the portless record appears nowhere in the per-protocol table or Venn
    assert report.venn.baseline_only == 0
    assert report.per_protocol[123].baseline_total == 1


def test_venn_units():
    # two honeypot victims, one confirmed; two baseline events, one matched
    events = burst("203.0.113.9", 10) + burst("198.51.100.3", 10, t0=0.25)
    attacks = ccc_attacks(events)
    baseline = [
        record(0.0, 50.0, {123}, {"203.0.113.0/24"}),
        record(500.0, 600.0, {123}, {"192.0.2.0/24"}),
    ]
    report = match_baseline(attacks, baseline)
    assert (report.venn.honeypot_only, report.venn.overlap, report.venn.baseline_only) == (1, 1, 1)


def test_per_protocol_rows_cover_both_sides():
    events = burst("203.0.113.9", 10, dport=123)
    attacks = ccc_attacks(events)
    baseline = [record(0.0, 50.0, {19}, {"10.0.0.0/8"})]  # port only baseline saw
    report = match_baseline(attacks, baseline)
    assert set(report.per_protocol) == {19, 123}
    assert report.per_protocol[19].baseline_total == 1
    assert report.per_protocol[19].honeypot_victims == 0
    assert report.per_protocol[123].baseline_total == 0
    assert report.per_protocol[123].honeypot_victims == 1
    assert report.per_protocol[123].honeypot_only == 1


def test_one_record_matched_on_multiple_ports_counts_once():
    events = burst("203.0.113.9", 10, dport=123) + burst("203.0.113.9", 10, dport=53, t0=0.25)
    attacks = ccc_attacks(events)
    both = record(0.0, 50.0, {53, 123}, {"203.0.113.0/24"})
    report = match_baseline(attacks, [both])
    assert report.matched_with_ports == 1
    assert report.per_protocol[53].matched_by_detector == 1
    assert report.per_protocol[123].matched_by_detector == 1


def test_upper_bound_sees_below_threshold_traffic():
    # 3 packets: invisible to every detector, visible to the packet-level bound
    events = sorted(burst("203.0.113.9", 3), key=trace_sort_key)
    baseline = [record(0.0, 50.0, {123}, {"203.0.113.0/24"})]
    assert match_baseline(ccc_attacks(events), baseline).matched_with_ports == 0
    fragment = upper_bound(events, baseline)
    assert fragment.covered_with_ports == 1
    assert fragment.per_protocol == {123: 1}


def test_upper_bound_checks_port_window_and_prefix():
    events = sorted(burst("203.0.113.9", 3, t0=100.0), key=trace_sort_key)
    cases = [
        (record(0.0, 99.0, {123}, {"203.0.113.0/24"}), 0),   # window ends early
        (record(0.0, 100.0, {123}, {"203.0.113.0/24"}), 1),  # closed boundary
        (record(100.0, 300.0, {53}, {"203.0.113.0/24"}), 0),  # wrong port
        (record(100.0, 300.0, {123}, {"10.0.0.0/8"}), 0),     # wrong prefix
    ]
    for rec, want in cases:
        assert upper_bound(events, rec and [rec]).covered_with_ports == want
    assert upper_bound(events, [record(0.0, 99.0, {123}, {"203.0.113.0/24"})],
                       slack_s=1.0).covered_with_ports == 1


def test_upper_bound_portless():
    events = sorted(burst("203.0.113.9", 2), key=trace_sort_key)
    fragment = upper_bound(events, [record(0.0, 50.0, set(), {"203.0.113.0/24"})])
    assert fragment.portless_covered == 1
    assert fragment.covered_with_ports == 0


def test_overlap_report_merges_both_directions():
    events = sorted(
        burst("203.0.113.9", 10) + burst("198.51.100.3", 3, t0=0.25), key=trace_sort_key
    )
    baseline = [
        record(0.0, 50.0, {123}, {"203.0.113.0/24"}),
        record(0.0, 50.0, {123}, {"198.51.100.0/24"}),
    ]
    report = overlap_report(ccc_attacks(events), events, baseline)
    assert report.matched_with_ports == 1   # the 3-packet source stays sub-threshold
    assert report.upper_with_ports == 2     # but its packets are on the wire
    assert report.detector_share == 0.5
    assert report.upper_share == 1.0
    assert report.per_protocol[123].matched_upper_bound == 2
    # the bound can only move up from the detector's count
    assert report.upper_with_ports >= report.matched_with_ports


def test_empty_baseline_shares_are_zero():
    report = overlap_report([], [], [])
    assert report.detector_share == 0.0 and report.upper_share == 0.0


def test_report_serialization(tmp_path):
    events = sorted(burst("203.0.113.9", 10), key=trace_sort_key)
    baseline = [record(0.0, 50.0, {123}, {"203.0.113.0/24"})]
    report = overlap_report(ccc_attacks(events), events, baseline)

    data = report_to_dict(report)
    assert data["per_protocol"]["123"]["matched_by_detector"] == 1
    assert data["portless"] == {"total": 0, "matched_by_detector": 0, "matched_upper_bound": 0}

    json_path = tmp_path / "overlap.json"
    write_overlap_json(report, str(json_path))
    assert json.loads(json_path.read_text()) == data

    venn_path = tmp_path / "venn.csv"
    write_venn_csv(report, str(venn_path))
    lines = venn_path.read_text().splitlines()
    assert lines[0] == "set,count"
    assert lines[1:] == ["honeypot_only,0", "overlap,1", "baseline_only,0"]


def scanner_scenario():
    spec = ScenarioSpec(
        seed=21,
        sensors=5,
        duration_s=1200.0,
        attacks=(
            AttackSpec(victim="203.0.113.50", start=0.0, stop=600.0, rate_pps=0.5),
        ),
        scans=(ScanSpec(source="203.0.113.200", ports=(123, 53), start=0.0),),
    )
    return synth(spec)


def test_classify_sources_three_way():
    corpus = scanner_scenario()
    scanners = ScannerList(
        sources=frozenset({"203.0.113.200", "203.0.113.50", "192.88.99.1"})
    )
    preset = PRESETS["ccc"]
    result = classify_sources(scanners, corpus.events, preset.scheme, preset.thresholds)
    assert result.classes == {
        "203.0.113.200": CLASS_SCAN_ONLY,
        "203.0.113.50": CLASS_ATTACK,
        "192.88.99.1": CLASS_UNSEEN,
    }
    assert result.packets["192.88.99.1"] == 0
    assert result.packets["203.0.113.200"] == 10  # 5 sensors x 2 ports
    assert result.attack_events["203.0.113.50"] > 0
    assert result.counts == {CLASS_ATTACK: 1, CLASS_SCAN_ONLY: 1, CLASS_UNSEEN: 1}
    assert result.shares[CLASS_ATTACK] == pytest.approx(1 / 3)
    assert sum(result.shares.values()) == pytest.approx(1.0)


def test_classify_sources_empty_list():
    corpus = scanner_scenario()
    preset = PRESETS["ccc"]
    result = classify_sources(
        ScannerList(sources=frozenset()), corpus.events, preset.scheme, preset.thresholds
    )
    assert result.counts == {CLASS_ATTACK: 0, CLASS_SCAN_ONLY: 0, CLASS_UNSEEN: 0}
    assert all(share == 0.0 for share in result.shares.values())


def test_source_csvs(tmp_path):
    corpus = scanner_scenario()
    scanners = ScannerList(sources=frozenset({"203.0.113.200", "192.88.99.1"}))
    preset = PRESETS["ccc"]
    result = classify_sources(scanners, corpus.events, preset.scheme, preset.thresholds)

    sources_path = tmp_path / "sources.csv"
    write_source_classes_csv(result, str(sources_path))
    lines = sources_path.read_text().splitlines()
    assert lines[0] == "source,class,packets,attack_events"
    # rows sorted by numeric address: 192.88.99.1 < 203.0.113.200
    assert lines[1].startswith("192.88.99.1,unseen,0,")
    assert lines[2].startswith("203.0.113.200,scan-only,10,")

    shares_path = tmp_path / "shares.csv"
    write_class_shares_csv(result, str(shares_path))
    lines = shares_path.read_text().splitlines()
    assert lines[0] == "class,count,share"
    assert lines[1] == "attack,0,0.0"
    assert lines[2] == "scan-only,1,0.5"
    assert lines[3] == "unseen,1,0.5"
