"""Flow identifiers and idle-timeout flow assembly.

A *flow scheme* picks which packet fields form the flow identifier and at
which scope flows are tracked: per-sensor (the sensor id is part of the key)
or per-platform (packets from all sensors share keys; the sensor and the
sensor-identifying dst address are ignored unless explicitly selected).
Assembly then splits each key's packet sequence wherever the gap between
consecutive packets exceeds the idle timeout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple

from .events import PacketEvent, int_to_ipv4, ipv4_to_int

__all__ = [
    "PER_SENSOR",
    "PER_PLATFORM",
    "UnsortedTraceError",
    "FlowScheme",
    "FlowKey",
    "Flow",
    "flow_key",
    "key_function",
    "assemble",
]

PER_SENSOR = "per-sensor"
PER_PLATFORM = "per-platform"


class UnsortedTraceError(ValueError):
    """The event stream handed to assembly was not time-ordered."""


@dataclass(frozen=True)
class FlowScheme:
    """Field selection for the flow identifier.

    Exactly one of ``use_src_addr``/``use_src_prefix`` must be set: the
    source appears either as its full address or truncated to
    ``src_prefix_len`` bits. The remaining flags opt fields into the key.
    ``scope`` decides whether the sensor id participates.
    """

    scope: str = PER_SENSOR
    use_src_addr: bool = True
    use_src_prefix: bool = False
    src_prefix_len: int = 24
    use_dst_addr: bool = False
    use_src_port: bool = False
    use_dst_port: bool = True

    def __post_init__(self) -> None:
        if self.scope not in (PER_SENSOR, PER_PLATFORM):
            raise ValueError(f"scope must be {PER_SENSOR!r} or {PER_PLATFORM!r}: {self.scope!r}")
        if self.use_src_addr == self.use_src_prefix:
            raise ValueError("exactly one of use_src_addr/use_src_prefix must be set")
        if not 0 <= self.src_prefix_len <= 32:
            raise ValueError(f"src_prefix_len out of range: {self.src_prefix_len}")

    @property
    def sensor_distinguishing(self) -> bool:
        """True when distinct sensors can never share a flow (sensor or dst addr keyed)."""
        return self.scope == PER_SENSOR or self.use_dst_addr


class FlowKey(NamedTuple):
    """Projected flow identifier; unselected fields are None.

    ``src`` holds either the source address or its prefix in CIDR form,
    depending on the scheme. Field order is the canonical one used for
    display and sorting: sensor, src, dst_ip, src_port, dst_port.
    """

    sensor: str | None
    src: str
    dst_ip: str | None
    src_port: int | None
    dst_port: int | None

    def projected(self) -> tuple:
        """Only the selected fields, in canonical order."""
        return tuple(v for v in self if v is not None)

    def sort_key(self) -> tuple:
        return (
            self.sensor or "",
            self.src,
            self.dst_ip or "",
            -1 if self.src_port is None else self.src_port,
            -1 if self.dst_port is None else self.dst_port,
        )

    def without_sensor(self) -> "FlowKey":
        """The key with sensor-identifying fields (sensor id, dst addr) blanked."""
        return FlowKey(None, self.src, None, self.src_port, self.dst_port)


def key_function(scheme: FlowScheme) -> Callable[[PacketEvent], FlowKey]:
    """Compile a scheme into a per-event key extractor.

    Prefix truncation memoizes source -> CIDR string per returned function,
    which is what makes platform-scale keying cheap: real traces repeat
    sources millions of times.
    """
    per_sensor = scheme.scope == PER_SENSOR
    use_dst = scheme.use_dst_addr
    use_sport = scheme.use_src_port
    use_dport = scheme.use_dst_port

    if scheme.use_src_prefix:
        plen = scheme.src_prefix_len
        mask = (0xFFFFFFFF << (32 - plen)) & 0xFFFFFFFF
        cache: dict[str, str] = {}

        def src_of(addr: str) -> str:
            cidr = cache.get(addr)
            if cidr is None:
                cidr = f"{int_to_ipv4(ipv4_to_int(addr) & mask)}/{plen}"
                cache[addr] = cidr
            return cidr

    else:
        def src_of(addr: str) -> str:
            return addr

    def key_of(event: PacketEvent) -> FlowKey:
        return FlowKey(
            event.sensor if per_sensor else None,
            src_of(event.src_ip),
            event.dst_ip if use_dst else None,
            event.src_port if use_sport else None,
            event.dst_port if use_dport else None,
        )

    return key_of


def flow_key(event: PacketEvent, scheme: FlowScheme) -> FlowKey:
    """One-shot key projection; use :func:`key_function` in loops."""
    return key_function(scheme)(event)


class Flow(NamedTuple):
    """A maximal run of same-key packets with no internal gap over the timeout.

    Packets are in time order, so span bounds are just the end packets.
    Derived views (sensors, ports) are computed on demand; most flows are
    only ever counted.
    """

    key: FlowKey
    packets: tuple[PacketEvent, ...]

    @property
    def first_ts(self) -> float:
        return self.packets[0].ts

    @property
    def last_ts(self) -> float:
        return self.packets[-1].ts

    @property
    def packet_count(self) -> int:
        return len(self.packets)

    @property
    def sensors(self) -> frozenset[str]:
        return frozenset(p.sensor for p in self.packets)

    @property
    def dst_ports(self) -> frozenset[int]:
        return frozenset(p.dst_port for p in self.packets)


def assemble(
    events: Iterable[PacketEvent],
    scheme: FlowScheme,
    idle_timeout: float,
) -> list[Flow]:
    """Partition a time-ordered event stream into flows.

    A packet joins its key's open flow when the gap to that flow's previous
    packet is <= ``idle_timeout`` (strictly greater splits; equality keeps
    the flow alive). There is no active timeout: a flow lives as long as
    packets keep arriving. All flows still open at end of stream are closed
    and emitted.

    Every event lands in exactly one flow, so the result is a partition of
    the input. Flows come back sorted by (first_ts, key).

    Raises :class:`UnsortedTraceError` the moment a timestamp regresses;
    silently mis-assembling an unsorted trace would corrupt every count
    downstream.
    """
    if not idle_timeout > 0:
        raise ValueError(f"idle_timeout must be positive: {idle_timeout}")
    key_of = key_function(scheme)
    open_flows: dict[FlowKey, list[PacketEvent]] = {}
    done: list[Flow] = []
    prev_ts = -math.inf
    for event in events:
        if event.ts < prev_ts:
            raise UnsortedTraceError(
                f"event at ts={event.ts} arrived after ts={prev_ts}; assemble requires a time-ordered stream"
            )
        prev_ts = event.ts
        key = key_of(event)
        packets = open_flows.get(key)
        if packets is None:
            open_flows[key] = [event]
        elif event.ts - packets[-1].ts > idle_timeout:
            done.append(Flow(key, tuple(packets)))
            open_flows[key] = [event]
        else:
            packets.append(event)
    for key, packets in open_flows.items():
        done.append(Flow(key, tuple(packets)))
    done.sort(key=lambda f: (f.packets[0].ts, f.key.sort_key()))
    return done
