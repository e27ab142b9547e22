"""Attack detection: packet-load thresholds over assembled flows.

A threshold set turns flows into attack events. The bundled presets mirror
the published configurations of six deployed amplification honeypot
pipelines; each pairs a flow scheme with its thresholds so the whole
detector is reproducible from a name.

Victims are reported at the granularity the scheme implies: address-keyed
schemes yield address victims, prefix-keyed schemes yield /len prefix
victims, and carpet-bombing aggregation yields prefix victims built from
address-level attack events.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Sequence

from .events import PacketEvent, int_to_ipv4, ipv4_to_int
from .flows import PER_PLATFORM, PER_SENSOR, Flow, FlowKey, FlowScheme, assemble

__all__ = [
    "COMPARE_AT_LEAST",
    "COMPARE_MORE_THAN",
    "GRANULARITY_ADDRESS",
    "GRANULARITY_PREFIX",
    "ConfigurationError",
    "AttackThresholds",
    "Victim",
    "AttackEvent",
    "DetectionPreset",
    "PRESETS",
    "permissive_thresholds",
    "detect",
    "detect_attacks",
    "victims",
    "detect_carpet_bombing",
    "write_attack_report",
]

COMPARE_AT_LEAST = ">="
COMPARE_MORE_THAN = ">"

GRANULARITY_ADDRESS = "address"
GRANULARITY_PREFIX = "prefix"


class ConfigurationError(ValueError):
    """Thresholds are inconsistent with the flow scheme that produced the flows."""


@dataclass(frozen=True)
class AttackThresholds:
    """Packet-load conditions a flow (or flow cluster) must meet.

    ``comparison`` applies to the packet count: ``">="`` keeps flows with
    at least ``min_packets``, ``">"`` keeps strictly more. ``min_dst_ports``
    requires that many distinct destination ports inside one attack event;
    ``min_sensors`` requires the event to span that many distinct sensors.
    """

    name: str
    idle_timeout: float
    min_packets: int
    min_dst_ports: int = 1
    min_sensors: int = 1
    comparison: str = COMPARE_AT_LEAST

    def __post_init__(self) -> None:
        if not self.idle_timeout > 0:
            raise ValueError(f"idle_timeout must be positive: {self.idle_timeout}")
        if self.min_packets < 1:
            raise ValueError(f"min_packets must be >= 1: {self.min_packets}")
        if self.min_dst_ports < 1:
            raise ValueError(f"min_dst_ports must be >= 1: {self.min_dst_ports}")
        if self.min_sensors < 1:
            raise ValueError(f"min_sensors must be >= 1: {self.min_sensors}")
        if self.comparison not in (COMPARE_AT_LEAST, COMPARE_MORE_THAN):
            raise ValueError(f"comparison must be '>=' or '>': {self.comparison!r}")

    def passes_load(self, packet_count: int) -> bool:
        if self.comparison == COMPARE_AT_LEAST:
            return packet_count >= self.min_packets
        return packet_count > self.min_packets


def permissive_thresholds(idle_timeout: float) -> AttackThresholds:
    """Every flow is an attack: the upper-bound configuration."""
    return AttackThresholds(name="permissive", idle_timeout=idle_timeout, min_packets=1)


@dataclass(frozen=True)
class Victim:
    """Attack target: a single address or a CIDR prefix."""

    identity: str
    granularity: str

    def __post_init__(self) -> None:
        if self.granularity not in (GRANULARITY_ADDRESS, GRANULARITY_PREFIX):
            raise ValueError(f"granularity must be address or prefix: {self.granularity!r}")

    def sort_key(self) -> tuple[str, str]:
        return (self.identity, self.granularity)


def _victim_of_key_src(src: str) -> Victim:
    if "/" in src:
        return Victim(src, GRANULARITY_PREFIX)
    return Victim(src, GRANULARITY_ADDRESS)


@dataclass(frozen=True)
class AttackEvent:
    """One detected attack: the victim plus the flows that triggered it."""

    victim: Victim
    flows: tuple[Flow, ...]
    first_ts: float
    last_ts: float
    total_packets: int
    sensors: frozenset[str]
    dst_ports: frozenset[int]

    @classmethod
    def from_flows(cls, victim: Victim, flows: Sequence[Flow]) -> "AttackEvent":
        ordered = tuple(sorted(flows, key=lambda f: (f.first_ts, f.key.sort_key())))
        sensors: set[str] = set()
        ports: set[int] = set()
        total = 0
        for flow in ordered:
            total += flow.packet_count
            sensors.update(flow.sensors)
            ports.update(flow.dst_ports)
        return cls(
            victim=victim,
            flows=ordered,
            first_ts=ordered[0].first_ts,
            last_ts=max(f.last_ts for f in ordered),
            total_packets=total,
            sensors=frozenset(sensors),
            dst_ports=frozenset(ports),
        )


@dataclass(frozen=True)
class DetectionPreset:
    """A named (scheme, thresholds) pair reproducing one published pipeline."""

    name: str
    scheme: FlowScheme
    thresholds: AttackThresholds
    summary: str = ""


# Published pipeline configurations. Sources for the numbers, per preset:
# amppot: Kramer et al., RAID 2015. amppotmod: the AmpPot variant operated for
# the booter study of Noroozian et al., RAID 2016 (same keying, 10 min timeout).
# ccc: Thomas/Clayton/Beresford, eCrime 2017. newkid-mono/-multi: Heinrich et
# al., PAM 2021. hpi: Griffioen et al., CCS 2021.
PRESETS: dict[str, DetectionPreset] = {
    "amppot": DetectionPreset(
        name="amppot",
        scheme=FlowScheme(scope=PER_PLATFORM, use_dst_port=True),
        thresholds=AttackThresholds(name="amppot", idle_timeout=3600.0, min_packets=100),
        summary="platform-wide (src, dst port) flows, 60 min idle timeout, >= 100 packets",
    ),
    "amppotmod": DetectionPreset(
        name="amppotmod",
        scheme=FlowScheme(scope=PER_PLATFORM, use_dst_port=True),
        thresholds=AttackThresholds(name="amppotmod", idle_timeout=600.0, min_packets=100),
        summary="platform-wide (src, dst port) flows, 10 min idle timeout, >= 100 packets",
    ),
    "ccc": DetectionPreset(
        name="ccc",
        scheme=FlowScheme(scope=PER_SENSOR, use_dst_addr=True, use_dst_port=True),
        thresholds=AttackThresholds(name="ccc", idle_timeout=900.0, min_packets=5),
        summary="per-sensor (src, dst addr, dst port) flows, 15 min idle timeout, >= 5 packets",
    ),
    "newkid-mono": DetectionPreset(
        name="newkid-mono",
        scheme=FlowScheme(
            scope=PER_PLATFORM,
            use_src_addr=False,
            use_src_prefix=True,
            src_prefix_len=24,
            use_dst_addr=True,
            use_dst_port=True,
        ),
        thresholds=AttackThresholds(name="newkid-mono", idle_timeout=60.0, min_packets=5),
        summary="platform-wide (src /24, dst addr, dst port) flows, 60 s idle timeout, >= 5 packets",
    ),
    "newkid-multi": DetectionPreset(
        name="newkid-multi",
        scheme=FlowScheme(
            scope=PER_PLATFORM,
            use_src_addr=False,
            use_src_prefix=True,
            src_prefix_len=24,
            use_dst_addr=True,
            use_dst_port=False,
        ),
        thresholds=AttackThresholds(
            name="newkid-multi", idle_timeout=60.0, min_packets=5, min_dst_ports=2
        ),
        summary="platform-wide (src /24, dst addr) flows, 60 s idle timeout, >= 5 packets on >= 2 ports",
    ),
    "hpi": DetectionPreset(
        name="hpi",
        scheme=FlowScheme(scope=PER_SENSOR, use_dst_addr=True, use_dst_port=True),
        thresholds=AttackThresholds(
            name="hpi",
            idle_timeout=60.0,
            min_packets=20,
            min_sensors=2,
            comparison=COMPARE_MORE_THAN,
        ),
        summary="per-sensor (src, dst addr, dst port) flows, 60 s idle timeout, > 20 packets, seen by >= 2 sensors",
    ),
}


def _event_sort_key(event: AttackEvent) -> tuple:
    return (event.first_ts, event.victim.identity, event.flows[0].key.sort_key())


def detect(flows: Sequence[Flow], thresholds: AttackThresholds) -> list[AttackEvent]:
    """Apply thresholds to assembled flows and emit attack events.

    With ``min_sensors == 1`` every qualifying flow becomes its own attack
    event. With ``min_sensors > 1`` on per-sensor flows, flows that (a) pass
    the packet condition individually and (b) share the same key modulo
    sensor are clustered by pairwise time overlap: a cluster grows while the
    next flow still overlaps every member, i.e. starts before the cluster's
    earliest end. A cluster spanning >= min_sensors distinct sensors becomes
    one attack event. Platform-scoped flows satisfy the sensor condition on
    their own when their packets span enough sensors.

    The port condition is evaluated on the attack event's union of ports,
    which is why it cannot be combined with a dst-port-keyed scheme: such
    flows see exactly one port each, so the combination is rejected as a
    configuration error instead of silently detecting nothing.

    Events come back sorted by (first_ts, victim).
    """
    if not flows:
        return []
    sample_key = flows[0].key
    if thresholds.min_dst_ports > 1 and sample_key.dst_port is not None:
        raise ConfigurationError(
            f"min_dst_ports={thresholds.min_dst_ports} cannot be met by a dst-port-keyed "
            "scheme: every flow sees exactly one destination port"
        )

    events: list[AttackEvent] = []
    if thresholds.min_sensors == 1 or sample_key.sensor is None:
        for flow in flows:
            if not thresholds.passes_load(flow.packet_count):
                continue
            if thresholds.min_dst_ports > 1 and len(flow.dst_ports) < thresholds.min_dst_ports:
                continue
            if thresholds.min_sensors > 1 and len(flow.sensors) < thresholds.min_sensors:
                continue
            events.append(AttackEvent.from_flows(_victim_of_key_src(flow.key.src), (flow,)))
    else:
        groups: dict[FlowKey, list[Flow]] = {}
        for flow in flows:
            if thresholds.passes_load(flow.packet_count):
                groups.setdefault(flow.key.without_sensor(), []).append(flow)
        for group_key in sorted(groups, key=FlowKey.sort_key):
            members = sorted(groups[group_key], key=lambda f: (f.first_ts, f.key.sort_key()))
            cluster: list[Flow] = []
            window_end = 0.0
            for flow in members + [None]:  # sentinel flushes the last cluster
                if cluster and (flow is None or flow.first_ts > window_end):
                    distinct = {s for f in cluster for s in f.sensors}
                    ports = {p for f in cluster for p in f.dst_ports}
                    if len(distinct) >= thresholds.min_sensors and len(ports) >= thresholds.min_dst_ports:
                        events.append(
                            AttackEvent.from_flows(_victim_of_key_src(group_key.src), cluster)
                        )
                    cluster = []
                if flow is None:
                    break
                if not cluster:
                    window_end = flow.last_ts
                else:
                    window_end = min(window_end, flow.last_ts)
                cluster.append(flow)

    events.sort(key=_event_sort_key)
    return events


def detect_attacks(
    events: Iterable[PacketEvent],
    preset: DetectionPreset,
    thresholds: AttackThresholds | None = None,
) -> list[AttackEvent]:
    """Assemble with the preset's scheme and detect; ``thresholds`` overrides the preset's."""
    active = thresholds if thresholds is not None else preset.thresholds
    return detect(assemble(events, preset.scheme, active.idle_timeout), active)


def victims(attacks: Iterable[AttackEvent]) -> set[Victim]:
    return {event.victim for event in attacks}


def detect_carpet_bombing(
    attacks: Sequence[AttackEvent],
    prefix_len: int = 24,
    min_flows: int = 16,
    window_s: float | None = 900.0,
) -> list[AttackEvent]:
    """Aggregate address-level attack events into prefix-level carpet events.

    A /``prefix_len`` becomes a carpet victim when at least ``min_flows``
    attack flows against addresses inside it intersect one time window of
    length ``window_s``. Candidate windows are anchored at each flow's start;
    the earliest qualifying anchor wins and its intersecting flows form the
    event. ``window_s=None`` drops the time constraint entirely.

    Expects address-granularity input (an address-keyed scheme upstream);
    prefix-granularity events are ignored, they already aggregate.
    """
    if not 0 <= prefix_len <= 32:
        raise ValueError(f"prefix_len out of range: {prefix_len}")
    if min_flows < 1:
        raise ValueError(f"min_flows must be >= 1: {min_flows}")
    if window_s is not None and not window_s > 0:
        raise ValueError(f"window_s must be positive or None: {window_s}")

    mask = (0xFFFFFFFF << (32 - prefix_len)) & 0xFFFFFFFF
    by_prefix: dict[int, list[Flow]] = {}
    for event in attacks:
        if event.victim.granularity != GRANULARITY_ADDRESS:
            continue
        net = ipv4_to_int(event.victim.identity) & mask
        by_prefix.setdefault(net, []).extend(event.flows)

    carpets: list[AttackEvent] = []
    for net in sorted(by_prefix):
        flows = sorted(by_prefix[net], key=lambda f: (f.first_ts, f.key.sort_key()))
        if len(flows) < min_flows:
            continue
        if window_s is None:
            chosen = flows
        else:
            chosen = None
            for anchor in flows:
                start = anchor.first_ts
                hits = [
                    f for f in flows
                    if f.first_ts <= start + window_s and f.last_ts >= start
                ]
                if len(hits) >= min_flows:
                    chosen = hits
                    break
            if chosen is None:
                continue
        victim = Victim(f"{int_to_ipv4(net)}/{prefix_len}", GRANULARITY_PREFIX)
        carpets.append(AttackEvent.from_flows(victim, chosen))

    carpets.sort(key=_event_sort_key)
    return carpets


def write_attack_report(attacks: Iterable[AttackEvent], preset_name: str, path: str) -> None:
    """JSONL report, one attack event per line, set fields as sorted lists."""
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for event in attacks:
            handle.write(
                json.dumps(
                    {
                        "victim": event.victim.identity,
                        "granularity": event.victim.granularity,
                        "first_ts": event.first_ts,
                        "last_ts": event.last_ts,
                        "packets": event.total_packets,
                        "sensors": sorted(event.sensors),
                        "dst_ports": sorted(event.dst_ports),
                        "preset": preset_name,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )
