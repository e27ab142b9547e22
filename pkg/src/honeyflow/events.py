"""Domain records and file formats for honeypot packet telemetry.

Every input is line-oriented UTF-8 text. Packet events and baseline attack
records are one JSON object per line; scanner lists are one dotted-quad
address per line with ``#`` starting a comment line. Parsers are strict:
a line either yields a record or raises :class:`FormatError` naming the
offending field and line number. Blank lines are skipped everywhere.

Addresses are IPv4 only. IPv6 input is rejected with a clear error rather
than silently mangled.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator

__all__ = [
    "FormatError",
    "PacketEvent",
    "BaselineAttack",
    "ScannerList",
    "ProtocolProfile",
    "ipv4_to_int",
    "int_to_ipv4",
    "normalize_prefix",
    "prefix_net_mask",
    "parse_event_line",
    "serialize_event",
    "load_trace",
    "write_trace",
    "parse_baseline_line",
    "serialize_baseline",
    "load_baseline",
    "write_baseline",
    "load_scanner_list",
    "write_scanner_list",
    "load_profiles",
    "write_profiles",
]


class FormatError(ValueError):
    """An input line violates its documented format."""


# -- IPv4 helpers -------------------------------------------------------------
#
# Deliberately not ipaddress: flow keying truncates millions of sources to
# prefixes per analysis run and the int round-trip below is an order of
# magnitude faster, with error wording the format contract controls.

def ipv4_to_int(addr: str) -> int:
    """Parse a dotted-quad IPv4 address to its 32-bit integer value.

    Strict: exactly four decimal octets, no leading zeros (``010`` is
    ambiguous octal in too many tools to let through), each 0..255.
    """
    if not isinstance(addr, str):
        raise ValueError(f"address must be a string, got {type(addr).__name__}")
    if ":" in addr:
        raise ValueError(f"IPv6 addresses are not supported (IPv4 only): {addr!r}")
    parts = addr.split(".")
    if len(parts) != 4:
        raise ValueError(f"not a dotted-quad IPv4 address: {addr!r}")
    value = 0
    for part in parts:
        if not part.isdigit():
            raise ValueError(f"not a dotted-quad IPv4 address: {addr!r}")
        if len(part) > 1 and part[0] == "0":
            raise ValueError(f"leading zeros are not allowed in IPv4 octets: {addr!r}")
        octet = int(part)
        if octet > 255:
            raise ValueError(f"IPv4 octet out of range in {addr!r}")
        value = (value << 8) | octet
    return value


def int_to_ipv4(value: int) -> str:
    if not 0 <= value <= 0xFFFFFFFF:
        raise ValueError(f"IPv4 integer out of range: {value}")
    return f"{value >> 24}.{(value >> 16) & 0xFF}.{(value >> 8) & 0xFF}.{value & 0xFF}"


def prefix_net_mask(prefix: str) -> tuple[int, int]:
    """Split ``"a.b.c.d/len"`` into (network, mask) integers, host bits zeroed."""
    addr, sep, length = prefix.partition("/")
    if not sep:
        raise ValueError(f"prefix must be written as address/length: {prefix!r}")
    if not length.isdigit():
        raise ValueError(f"malformed prefix length in {prefix!r}")
    plen = int(length)
    if plen > 32:
        raise ValueError(f"prefix length out of range in {prefix!r}")
    mask = (0xFFFFFFFF << (32 - plen)) & 0xFFFFFFFF
    return ipv4_to_int(addr) & mask, mask


def normalize_prefix(prefix: str) -> str:
    """Canonical CIDR form: host bits zeroed, e.g. ``203.0.113.77/24 -> 203.0.113.0/24``."""
    net, mask = prefix_net_mask(prefix)
    return f"{int_to_ipv4(net)}/{mask.bit_count()}"


def _prefix_sort_key(prefix: str) -> tuple[int, int]:
    net, mask = prefix_net_mask(prefix)
    return net, mask


# -- packet events ------------------------------------------------------------

def _check_port(value: int, name: str) -> None:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ValueError(f"{name} must be an integer")
    if not 0 <= value <= 65535:
        raise ValueError(f"{name} out of range: {value}")


@dataclass(frozen=True, slots=True)
class PacketEvent:
    """One packet seen by one sensor.

    ``ts`` is seconds (float, epoch or relative, the pipeline only differences
    them), ``sensor`` an opaque sensor id, ``dst_ip`` the sensor address the
    packet arrived on, ``dst_port`` the service port and therefore the
    protocol under the one-protocol-per-port convention.
    """

    ts: float
    sensor: str
    src_ip: str
    src_port: int
    dst_ip: str
    dst_port: int

    def __post_init__(self) -> None:
        if isinstance(self.ts, bool) or not isinstance(self.ts, (int, float)):
            raise ValueError("ts must be a number")
        if not math.isfinite(self.ts) or self.ts < 0:
            raise ValueError(f"ts must be finite and non-negative: {self.ts}")
        if not self.sensor or not isinstance(self.sensor, str):
            raise ValueError("sensor must be a non-empty string")
        ipv4_to_int(self.src_ip)
        ipv4_to_int(self.dst_ip)
        _check_port(self.src_port, "src_port")
        _check_port(self.dst_port, "dst_port")


_EVENT_KEYS = ("ts", "sensor", "src_ip", "src_port", "dst_ip", "dst_port")
_EVENT_KEY_SET = frozenset(_EVENT_KEYS)

# Canonical trace order. dst_ip is intentionally not part of the key; ties
# that differ only in dst_ip keep input order (the sort is stable).
def trace_sort_key(event: PacketEvent) -> tuple:
    return (event.ts, event.sensor, event.src_ip, event.src_port, event.dst_port)


def parse_event_line(line: str, line_no: int = 0) -> PacketEvent:
    """Parse one JSON event line, diagnosing the exact field on failure."""
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {line_no}: malformed event record: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise FormatError(f"line {line_no}: event record must be a JSON object")
    for key in _EVENT_KEYS:
        if key not in record:
            raise FormatError(f"line {line_no}: missing key '{key}'")
    for key in record:
        if key not in _EVENT_KEY_SET:
            raise FormatError(f"line {line_no}: unexpected key '{key}'")

    ts = record["ts"]
    if isinstance(ts, bool) or not isinstance(ts, (int, float)) or not math.isfinite(ts) or ts < 0:
        raise FormatError(f"line {line_no}: ts must be a finite non-negative number")
    sensor = record["sensor"]
    if not isinstance(sensor, str) or not sensor:
        raise FormatError(f"line {line_no}: sensor must be a non-empty string")
    for name in ("src_port", "dst_port"):
        value = record[name]
        if isinstance(value, bool) or not isinstance(value, int):
            raise FormatError(f"line {line_no}: {name} must be an integer")
        if not 0 <= value <= 65535:
            raise FormatError(f"line {line_no}: {name} out of range: {value}")
    for name in ("src_ip", "dst_ip"):
        try:
            ipv4_to_int(record[name])
        except ValueError as exc:
            raise FormatError(f"line {line_no}: {name}: {exc}") from exc

    return PacketEvent(
        ts=float(ts),
        sensor=sensor,
        src_ip=record["src_ip"],
        src_port=record["src_port"],
        dst_ip=record["dst_ip"],
        dst_port=record["dst_port"],
    )


def serialize_event(event: PacketEvent) -> str:
    """Inverse of :func:`parse_event_line`; round-trips exactly (floats via repr)."""
    return json.dumps(
        {
            "ts": event.ts,
            "sensor": event.sensor,
            "src_ip": event.src_ip,
            "src_port": event.src_port,
            "dst_ip": event.dst_ip,
            "dst_port": event.dst_port,
        },
        separators=(",", ":"),
    )


def _nonblank_lines(path: str) -> Iterator[tuple[int, str]]:
    with open(path, encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, 1):
            line = raw.strip()
            if line:
                yield line_no, line


def load_trace(path: str) -> list[PacketEvent]:
    """Load a JSONL trace and return it in canonical order.

    Events are sorted by (ts, sensor, src_ip, src_port, dst_port), stably,
    so downstream flow assembly sees a time-ordered stream regardless of
    how the file was produced.
    """
    events = [parse_event_line(line, line_no) for line_no, line in _nonblank_lines(path)]
    events.sort(key=trace_sort_key)
    return events


def write_trace(events: Iterable[PacketEvent], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for event in events:
            handle.write(serialize_event(event) + "\n")


# -- baseline attack records ---------------------------------------------------

@dataclass(frozen=True)
class BaselineAttack:
    """An attack interval reported by an independent vantage point.

    ``protocols`` is a set of destination ports; empty means the source had
    no port information and the record matches on prefix+time only (such
    records are tallied separately by the overlap report). ``prefixes`` is a
    non-empty set of CIDR strings, normalized on construction.
    """

    start_ts: float
    end_ts: float
    protocols: frozenset[int] = field(default_factory=frozenset)
    prefixes: frozenset[str] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        for name in ("start_ts", "end_ts"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
                raise ValueError(f"{name} must be a finite number")
        if self.end_ts < self.start_ts:
            raise ValueError(f"end_ts precedes start_ts: {self.end_ts} < {self.start_ts}")
        protocols = frozenset(self.protocols)
        for port in protocols:
            _check_port(port, "protocol port")
        if not self.prefixes:
            raise ValueError("prefixes must be non-empty")
        prefixes = frozenset(normalize_prefix(p) for p in self.prefixes)
        object.__setattr__(self, "protocols", protocols)
        object.__setattr__(self, "prefixes", prefixes)


_BASELINE_KEYS = ("start_ts", "end_ts", "protocols", "prefixes")


def parse_baseline_line(line: str, line_no: int = 0) -> BaselineAttack:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise FormatError(f"line {line_no}: malformed baseline record: {exc.msg}") from exc
    if not isinstance(record, dict):
        raise FormatError(f"line {line_no}: baseline record must be a JSON object")
    for key in _BASELINE_KEYS:
        if key not in record:
            raise FormatError(f"line {line_no}: missing key '{key}'")
    for key in record:
        if key not in _BASELINE_KEYS:
            raise FormatError(f"line {line_no}: unexpected key '{key}'")
    protocols = record["protocols"]
    prefixes = record["prefixes"]
    if not isinstance(protocols, list):
        raise FormatError(f"line {line_no}: protocols must be a list of ports")
    if not isinstance(prefixes, list) or not all(isinstance(p, str) for p in prefixes):
        raise FormatError(f"line {line_no}: prefixes must be a list of CIDR strings")
    try:
        return BaselineAttack(
            start_ts=record["start_ts"],
            end_ts=record["end_ts"],
            protocols=frozenset(protocols),
            prefixes=frozenset(prefixes),
        )
    except ValueError as exc:
        raise FormatError(f"line {line_no}: {exc}") from exc


def serialize_baseline(attack: BaselineAttack) -> str:
    return json.dumps(
        {
            "start_ts": attack.start_ts,
            "end_ts": attack.end_ts,
            "protocols": sorted(attack.protocols),
            "prefixes": sorted(attack.prefixes, key=_prefix_sort_key),
        },
        separators=(",", ":"),
    )


def load_baseline(path: str) -> list[BaselineAttack]:
    records = [parse_baseline_line(line, line_no) for line_no, line in _nonblank_lines(path)]
    records.sort(key=lambda b: (b.start_ts, b.end_ts, sorted(b.prefixes, key=_prefix_sort_key)))
    return records


def write_baseline(records: Iterable[BaselineAttack], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(serialize_baseline(record) + "\n")


# -- scanner lists --------------------------------------------------------------

@dataclass(frozen=True)
class ScannerList:
    """Sources a network telescope attributes to scanning, as bare addresses."""

    sources: frozenset[str]
    region_label: str = ""

    def __post_init__(self) -> None:
        for source in self.sources:
            ipv4_to_int(source)


def load_scanner_list(path: str, region_label: str = "") -> ScannerList:
    """One address per line; ``#`` begins a comment line (whole line only)."""
    sources = set()
    for line_no, line in _nonblank_lines(path):
        if line.startswith("#"):
            continue
        try:
            ipv4_to_int(line)
        except ValueError as exc:
            raise FormatError(f"line {line_no}: {exc}") from exc
        sources.add(line)
    return ScannerList(sources=frozenset(sources), region_label=region_label)


def write_scanner_list(scanners: ScannerList, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        if scanners.region_label:
            handle.write(f"# {scanners.region_label}\n")
        for source in sorted(scanners.sources, key=ipv4_to_int):
            handle.write(source + "\n")


# -- amplification protocol profiles --------------------------------------------

@dataclass(frozen=True)
class ProtocolProfile:
    """Per-protocol amplification parameters for the evasion model."""

    name: str
    dst_port: int
    request_size: float  # bytes on the wire per request
    amplification_factor: float
    amplifier_count: int

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("name must be non-empty")
        _check_port(self.dst_port, "dst_port")
        if not self.request_size > 0:
            raise ValueError(f"request_size must be positive: {self.request_size}")
        if not self.amplification_factor > 0:
            raise ValueError(f"amplification_factor must be positive: {self.amplification_factor}")
        if not isinstance(self.amplifier_count, int) or self.amplifier_count <= 0:
            raise ValueError(f"amplifier_count must be a positive integer: {self.amplifier_count}")


_PROFILE_KEYS = ("name", "dst_port", "request_size", "amplification_factor", "amplifier_count")


def load_profiles(path: str) -> list[ProtocolProfile]:
    """JSONL, keys exactly name/dst_port/request_size/amplification_factor/amplifier_count."""
    profiles = []
    for line_no, line in _nonblank_lines(path):
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"line {line_no}: malformed profile record: {exc.msg}") from exc
        if not isinstance(record, dict):
            raise FormatError(f"line {line_no}: profile record must be a JSON object")
        for key in _PROFILE_KEYS:
            if key not in record:
                raise FormatError(f"line {line_no}: missing key '{key}'")
        for key in record:
            if key not in _PROFILE_KEYS:
                raise FormatError(f"line {line_no}: unexpected key '{key}'")
        try:
            profiles.append(
                ProtocolProfile(
                    name=record["name"],
                    dst_port=record["dst_port"],
                    request_size=record["request_size"],
                    amplification_factor=record["amplification_factor"],
                    amplifier_count=record["amplifier_count"],
                )
            )
        except ValueError as exc:
            raise FormatError(f"line {line_no}: {exc}") from exc
    return profiles


def write_profiles(profiles: Iterable[ProtocolProfile], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for profile in profiles:
            handle.write(
                json.dumps(
                    {
                        "name": profile.name,
                        "dst_port": profile.dst_port,
                        "request_size": profile.request_size,
                        "amplification_factor": profile.amplification_factor,
                        "amplifier_count": profile.amplifier_count,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )
