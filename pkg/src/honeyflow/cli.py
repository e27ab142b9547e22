"""Command-line front end.

Exit codes: 0 success, 1 usage error (bad flags, unknown subcommand),
2 data error (unreadable or malformed input, contradictory configuration).
Every run writes its artifacts plus a ``manifest.json`` echoing the
effective configuration into the output directory (``--out``, else
``$HONEYFLOW_OUT``, else the current directory). Outputs carry no
timestamps, so rerunning a command reproduces every artifact byte for byte.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, replace

from . import __version__
from .completeness import (
    classify_sources,
    overlap_report,
    write_class_shares_csv,
    write_overlap_json,
    write_source_classes_csv,
    write_venn_csv,
)
from .convergence import (
    GREEDY_MAX_COVERAGE,
    GREEDY_STATIC_SORT,
    greedy_order,
    permutation_ensemble,
    sensor_victim_map,
    stability_trace,
    write_greedy_csv,
    write_rank_statistics_csv,
    write_stability_csv,
)
from .detection import (
    PRESETS,
    AttackThresholds,
    detect,
    detect_carpet_bombing,
    victims,
    write_attack_report,
)
from .evasion import BUILTIN_PROFILES, evasion_rows, write_evasion_csv
from .events import load_baseline, load_profiles, load_scanner_list, load_trace
from .flows import assemble
from .sweep import sweep, write_heatmap_csv
from .synth import spec_from_dict, spec_to_dict, synth, write_corpus

OUT_ENV = "HONEYFLOW_OUT"

# Upstream sources for each preset's numbers, surfaced in --help.
_PRESET_SOURCES = {
    "amppot": "Kramer et al., RAID 2015",
    "amppotmod": "Noroozian et al., RAID 2016",
    "ccc": "Thomas et al., eCrime 2017",
    "newkid-mono": "Heinrich et al., PAM 2021",
    "newkid-multi": "Heinrich et al., PAM 2021",
    "hpi": "Griffioen et al., CCS 2021",
}


class _Parser(argparse.ArgumentParser):
    """argparse, but usage problems exit 1 instead of 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _preset_epilog() -> str:
    lines = ["presets:"]
    for name in sorted(PRESETS):
        preset = PRESETS[name]
        lines.append(f"  {name:13s} {_PRESET_SOURCES[name]}: {preset.summary}")
    return "\n".join(lines)


def _add_out(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        "-o",
        default=None,
        help=f"output directory (default: ${OUT_ENV} or the current directory)",
    )


def _resolve_out(args) -> str:
    out = args.out or os.environ.get(OUT_ENV) or "."
    os.makedirs(out, exist_ok=True)
    return out


def _write_manifest(out: str, subcommand: str, config: dict, outputs: list[str]) -> None:
    payload = {
        "tool": "honeyflow",
        "version": __version__,
        "subcommand": subcommand,
        "config": config,
        "outputs": sorted(outputs),
    }
    path = os.path.join(out, "manifest.json")
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        handle.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _add_detector_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--preset", choices=sorted(PRESETS), help="published pipeline configuration")
    parser.add_argument(
        "--scheme",
        choices=sorted(PRESETS),
        help="flow identifier borrowed from this preset, for custom thresholds",
    )
    parser.add_argument("--idle-timeout", type=float, help="flow idle timeout in seconds")
    parser.add_argument("--min-packets", type=int, help="packet-load threshold")
    parser.add_argument("--min-dst-ports", type=int, default=None, help="distinct ports per attack event")
    parser.add_argument("--min-sensors", type=int, default=None, help="distinct sensors per attack event")
    parser.add_argument("--comparison", choices=[">=", ">"], default=None, help="packet-load comparison")


def _resolve_detector(parser: _Parser, args) -> tuple[str, object, AttackThresholds, dict]:
    """Returns (name, scheme, thresholds, config-echo)."""
    custom_flags = [
        args.scheme,
        args.idle_timeout,
        args.min_packets,
        args.min_dst_ports,
        args.min_sensors,
        args.comparison,
    ]
    if args.preset is not None:
        if any(flag is not None for flag in custom_flags):
            parser.error("--preset cannot be combined with custom scheme/threshold flags")
        preset = PRESETS[args.preset]
        name = preset.name
        scheme = preset.scheme
        thresholds = preset.thresholds
    else:
        if args.scheme is None or args.idle_timeout is None or args.min_packets is None:
            parser.error("either --preset or all of --scheme/--idle-timeout/--min-packets are required")
        scheme = PRESETS[args.scheme].scheme
        name = f"custom:{args.scheme}"
        thresholds = AttackThresholds(
            name=name,
            idle_timeout=args.idle_timeout,
            min_packets=args.min_packets,
            min_dst_ports=args.min_dst_ports if args.min_dst_ports is not None else 1,
            min_sensors=args.min_sensors if args.min_sensors is not None else 1,
            comparison=args.comparison if args.comparison is not None else ">=",
        )
    if getattr(args, "permissive", False):
        thresholds = AttackThresholds(
            name=f"{name}:permissive",
            idle_timeout=thresholds.idle_timeout,
            min_packets=1,
        )
        name = thresholds.name
    config = {
        "detector": name,
        "scheme": asdict(scheme),
        "thresholds": asdict(thresholds),
    }
    return name, scheme, thresholds, config


def _csv_floats(text: str) -> list[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated float list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("grid must name at least one value")
    return values


def _csv_ints(text: str) -> list[int]:
    try:
        values = [int(part) for part in text.split(",") if part.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}") from exc
    if not values:
        raise argparse.ArgumentTypeError("grid must name at least one value")
    return values


_RATE_SUFFIXES = {"gbps": 1e9, "mbps": 1e6, "kbps": 1e3, "bps": 1.0}


def _bitrate(text: str) -> float:
    lowered = text.strip().lower()
    for suffix, factor in _RATE_SUFFIXES.items():
        if lowered.endswith(suffix):
            try:
                return float(lowered[: -len(suffix)]) * factor
            except ValueError as exc:
                raise argparse.ArgumentTypeError(f"not a bitrate: {text!r}") from exc
    try:
        return float(lowered)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a bitrate: {text!r}") from exc


# -- subcommands ----------------------------------------------------------------

def _cmd_detect(parser: _Parser, args) -> int:
    name, scheme, thresholds, config = _resolve_detector(parser, args)
    out = _resolve_out(args)
    events = load_trace(args.events)
    attacks = detect(assemble(events, scheme, thresholds.idle_timeout), thresholds)
    if args.carpet:
        attacks = attacks + detect_carpet_bombing(
            attacks,
            prefix_len=args.carpet_prefix_len,
            min_flows=args.carpet_min_flows,
            window_s=thresholds.idle_timeout,
        )
    write_attack_report(attacks, name, os.path.join(out, "attacks.jsonl"))
    with open(os.path.join(out, "victims.csv"), "w", encoding="utf-8", newline="\n") as handle:
        handle.write("victim,granularity\n")
        for victim in sorted(victims(attacks), key=lambda v: v.sort_key()):
            handle.write(f"{victim.identity},{victim.granularity}\n")
    config.update(
        {
            "events": args.events,
            "carpet": bool(args.carpet),
            "carpet_prefix_len": args.carpet_prefix_len,
            "carpet_min_flows": args.carpet_min_flows,
        }
    )
    _write_manifest(out, "detect", config, ["attacks.jsonl", "victims.csv"])
    return 0


def _cmd_sweep(parser: _Parser, args) -> int:
    out = _resolve_out(args)
    events = load_trace(args.events)
    scheme = PRESETS[args.scheme].scheme
    base = AttackThresholds(
        name="sweep",
        idle_timeout=1.0,
        min_packets=1,
        min_dst_ports=args.min_dst_ports if args.min_dst_ports is not None else 1,
        min_sensors=args.min_sensors if args.min_sensors is not None else 1,
        comparison=args.comparison if args.comparison is not None else ">=",
    )
    grid = sweep(events, scheme, args.timeouts, args.loads, base)
    write_heatmap_csv(grid, os.path.join(out, "sweep.csv"))
    config = {
        "events": args.events,
        "scheme": args.scheme,
        "timeouts": args.timeouts,
        "loads": args.loads,
        "min_dst_ports": base.min_dst_ports,
        "min_sensors": base.min_sensors,
        "comparison": base.comparison,
    }
    _write_manifest(out, "sweep", config, ["sweep.csv"])
    return 0


def _cmd_converge(parser: _Parser, args) -> int:
    name, scheme, thresholds, config = _resolve_detector(parser, args)
    out = _resolve_out(args)
    events = load_trace(args.events)
    attacks = detect(assemble(events, scheme, thresholds.idle_timeout), thresholds)
    mapping = sensor_victim_map(attacks)
    curve = greedy_order(mapping, strategy=args.strategy)
    stats = permutation_ensemble(mapping, n_permutations=args.n_permutations, seed=args.seed)
    trace = stability_trace(
        mapping, batch=args.batch, max_permutations=args.n_permutations, seed=args.seed
    )
    write_greedy_csv(curve, os.path.join(out, "greedy.csv"))
    write_rank_statistics_csv(stats, os.path.join(out, "convergence.csv"))
    write_stability_csv(trace, os.path.join(out, "stability.csv"))
    config.update(
        {
            "events": args.events,
            "strategy": args.strategy,
            "n_permutations": args.n_permutations,
            "batch": args.batch,
            "seed": args.seed,
        }
    )
    _write_manifest(out, "converge", config, ["greedy.csv", "convergence.csv", "stability.csv"])
    return 0


def _cmd_overlap(parser: _Parser, args) -> int:
    name, scheme, thresholds, config = _resolve_detector(parser, args)
    out = _resolve_out(args)
    events = load_trace(args.events)
    baseline = load_baseline(args.baseline)
    attacks = detect(assemble(events, scheme, thresholds.idle_timeout), thresholds)
    report = overlap_report(attacks, events, baseline, slack_s=args.slack)
    write_overlap_json(report, os.path.join(out, "overlap.json"))
    write_venn_csv(report, os.path.join(out, "venn.csv"))
    config.update({"events": args.events, "baseline": args.baseline, "slack": args.slack})
    _write_manifest(out, "overlap", config, ["overlap.json", "venn.csv"])
    return 0


def _cmd_scanners(parser: _Parser, args) -> int:
    name, scheme, thresholds, config = _resolve_detector(parser, args)
    out = _resolve_out(args)
    events = load_trace(args.events)
    scanners = load_scanner_list(args.scanners)
    classification = classify_sources(scanners, events, scheme, thresholds)
    write_source_classes_csv(classification, os.path.join(out, "sources.csv"))
    write_class_shares_csv(classification, os.path.join(out, "shares.csv"))
    config.update({"events": args.events, "scanners": args.scanners})
    _write_manifest(out, "scanners", config, ["sources.csv", "shares.csv"])
    return 0


def _cmd_evade(parser: _Parser, args) -> int:
    out = _resolve_out(args)
    profiles = BUILTIN_PROFILES if args.profiles == "builtin" else tuple(load_profiles(args.profiles))
    rows = evasion_rows(
        profiles,
        attack_load_bps=args.load,
        duration_s=args.duration,
        platform_sensor_count=args.sensors,
    )
    write_evasion_csv(rows, os.path.join(out, "evasion.csv"))
    config = {
        "profiles": args.profiles,
        "attack_load_bps": args.load,
        "duration_s": args.duration,
        "platform_sensor_count": args.sensors,
    }
    _write_manifest(out, "evade", config, ["evasion.csv"])
    return 0


def _cmd_synth(parser: _Parser, args) -> int:
    out = _resolve_out(args)
    with open(args.spec, encoding="utf-8") as handle:
        data = json.load(handle)
    spec = spec_from_dict(data)
    if args.seed is not None:
        spec = replace(spec, seed=args.seed)
    corpus = synth(spec)
    outputs = write_corpus(corpus, out)
    _write_manifest(out, "synth", {"spec": spec_to_dict(spec)}, outputs)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="honeyflow", description="Amplification-honeypot telemetry analysis.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    detect_p = commands.add_parser(
        "detect",
        help="run one detector over a trace",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    detect_p.add_argument("--events", required=True, help="JSONL packet trace")
    _add_detector_args(detect_p)
    detect_p.add_argument("--permissive", action="store_true", help="classify every flow as an attack")
    detect_p.add_argument("--carpet", action="store_true", help="append carpet-bombing prefix events")
    detect_p.add_argument("--carpet-prefix-len", type=int, default=24)
    detect_p.add_argument("--carpet-min-flows", type=int, default=16)
    _add_out(detect_p)
    detect_p.set_defaults(func=_cmd_detect)

    sweep_p = commands.add_parser(
        "sweep",
        help="detector outcomes over a (timeout, load) grid",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sweep_p.add_argument("--events", required=True)
    sweep_p.add_argument("--scheme", required=True, choices=sorted(PRESETS))
    sweep_p.add_argument("--timeouts", required=True, type=_csv_floats, help="e.g. 60,600,900,3600")
    sweep_p.add_argument("--loads", required=True, type=_csv_ints, help="e.g. 1,5,20,100")
    sweep_p.add_argument("--min-dst-ports", type=int, default=None)
    sweep_p.add_argument("--min-sensors", type=int, default=None)
    sweep_p.add_argument("--comparison", choices=[">=", ">"], default=None)
    _add_out(sweep_p)
    sweep_p.set_defaults(func=_cmd_sweep)

    converge_p = commands.add_parser(
        "converge",
        help="sensor-count convergence statistics",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    converge_p.add_argument("--events", required=True)
    _add_detector_args(converge_p)
    converge_p.add_argument(
        "--strategy",
        choices=[GREEDY_MAX_COVERAGE, GREEDY_STATIC_SORT],
        default=GREEDY_MAX_COVERAGE,
    )
    converge_p.add_argument("--n-permutations", type=int, default=30_000)
    converge_p.add_argument("--batch", type=int, default=100)
    converge_p.add_argument("--seed", type=int, default=0)
    _add_out(converge_p)
    converge_p.set_defaults(func=_cmd_converge)

    overlap_p = commands.add_parser(
        "overlap",
        help="match detected attacks against a baseline feed",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    overlap_p.add_argument("--events", required=True)
    overlap_p.add_argument("--baseline", required=True, help="JSONL baseline attack records")
    _add_detector_args(overlap_p)
    overlap_p.add_argument("--slack", type=float, default=0.0, help="time-window slack in seconds")
    _add_out(overlap_p)
    overlap_p.set_defaults(func=_cmd_overlap)

    scanners_p = commands.add_parser(
        "scanners",
        help="classify telescope-listed sources against a detector",
        epilog=_preset_epilog(),
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    scanners_p.add_argument("--events", required=True)
    scanners_p.add_argument("--scanners", required=True, help="one address per line")
    _add_detector_args(scanners_p)
    _add_out(scanners_p)
    scanners_p.set_defaults(func=_cmd_scanners)

    evade_p = commands.add_parser("evade", help="attacker evasion arithmetic per protocol")
    evade_p.add_argument("--load", type=_bitrate, default=1e9, help="attack bandwidth, e.g. 1Gbps")
    evade_p.add_argument("--duration", type=float, default=300.0, help="attack duration in seconds")
    evade_p.add_argument("--profiles", default="builtin", help="'builtin' or a JSONL profile file")
    evade_p.add_argument("--sensors", type=int, default=8, help="platform sensor count")
    _add_out(evade_p)
    evade_p.set_defaults(func=_cmd_evade)

    synth_p = commands.add_parser("synth", help="generate a labeled synthetic corpus")
    synth_p.add_argument("--spec", required=True, help="JSON scenario description")
    synth_p.add_argument("--seed", type=int, default=None, help="override the spec seed")
    _add_out(synth_p)
    synth_p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(parser, args)
    except (ValueError, OSError) as exc:
        print(f"honeyflow: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
