"""Shared test fixtures: random traces and an independent flow-partition oracle.

The oracle deliberately reimplements flow semantics from scratch (ipaddress
for prefix truncation, plain dict-of-lists grouping, explicit gap scan) so
the engine and the oracle can only agree by both being right.
"""

from __future__ import annotations

import ipaddress
import random

from honeyflow import PacketEvent
from honeyflow.flows import PER_SENSOR, FlowScheme

TEST_PORTS = (53, 123, 389)
TEST_SRC_PORTS = (1111, 2222, 3333, 4444, 5555)


def make_sensors(n: int) -> tuple[list[str], dict[str, str]]:
    ids = [f"s{i:02d}" for i in range(1, n + 1)]
    return ids, {s: f"192.0.2.{i}" for i, s in enumerate(ids, 1)}


def make_random_trace(
    rng: random.Random,
    n_events: int,
    n_sensors: int = 5,
    n_sources: int = 60,
    duration: float = 30_000.0,
) -> list[PacketEvent]:
    """Random trace with enough key collisions to exercise grouping.

    Sources cluster into a handful of /24s and /16s so prefix-keyed schemes
    see multi-address keys.
    """
    sensors, saddr = make_sensors(n_sensors)
    sources = [
        f"10.{rng.randrange(2)}.{rng.randrange(4)}.{rng.randrange(1, 200)}"
        for _ in range(n_sources)
    ]
    events = [
        PacketEvent(
            rng.uniform(0.0, duration),
            (sensor := rng.choice(sensors)),
            rng.choice(sources),
            rng.choice(TEST_SRC_PORTS),
            saddr[sensor],
            rng.choice(TEST_PORTS),
        )
        for _ in range(n_events)
    ]
    events.sort(key=lambda e: (e.ts, e.sensor, e.src_ip, e.src_port, e.dst_port))
    return events


# distinct flow identifiers across all bundled presets, plus one exercising
# src_port and a non-default prefix length
def oracle_schemes() -> list[FlowScheme]:
    from honeyflow import PRESETS

    schemes = []
    seen = set()
    for name in ("amppot", "ccc", "newkid-mono", "newkid-multi", "hpi"):
        scheme = PRESETS[name].scheme
        if scheme not in seen:
            seen.add(scheme)
            schemes.append(scheme)
    schemes.append(
        FlowScheme(
            scope=PER_SENSOR,
            use_src_addr=False,
            use_src_prefix=True,
            src_prefix_len=16,
            use_src_port=True,
            use_dst_port=False,
        )
    )
    return schemes


_prefix_memo: dict[tuple[str, int], str] = {}


def _oracle_prefix(addr: str, plen: int) -> str:
    key = (addr, plen)
    cidr = _prefix_memo.get(key)
    if cidr is None:
        network = ipaddress.ip_network(f"{addr}/{plen}", strict=False)
        cidr = f"{network.network_address}/{plen}"
        _prefix_memo[key] = cidr
    return cidr


def oracle_group_indices(
    events: list[PacketEvent], scheme: FlowScheme
) -> list[list[int]]:
    """Group event indices by an independently computed flow identifier."""
    groups: dict[tuple, list[int]] = {}
    for index, event in enumerate(events):
        parts = []
        if scheme.scope == PER_SENSOR:
            parts.append(("sensor", event.sensor))
        if scheme.use_src_addr:
            parts.append(("src", event.src_ip))
        else:
            parts.append(("srcpfx", _oracle_prefix(event.src_ip, scheme.src_prefix_len)))
        if scheme.use_dst_addr:
            parts.append(("dst", event.dst_ip))
        if scheme.use_src_port:
            parts.append(("sport", event.src_port))
        if scheme.use_dst_port:
            parts.append(("dport", event.dst_port))
        groups.setdefault(tuple(parts), []).append(index)
    return list(groups.values())


def oracle_split_gaps(
    events: list[PacketEvent], grouped: list[list[int]], idle_timeout: float
) -> set[tuple[int, ...]]:
    """Split each index group at gaps strictly over the timeout."""
    partition: set[tuple[int, ...]] = set()
    for indices in grouped:
        start = 0
        for pos in range(1, len(indices)):
            if events[indices[pos]].ts - events[indices[pos - 1]].ts > idle_timeout:
                partition.add(tuple(indices[start:pos]))
                start = pos
        partition.add(tuple(indices[start:]))
    return partition


def oracle_partition(
    events: list[PacketEvent], scheme: FlowScheme, idle_timeout: float
) -> set[tuple[int, ...]]:
    return oracle_split_gaps(events, oracle_group_indices(events, scheme), idle_timeout)


def flows_to_index_partition(flows, events: list[PacketEvent]) -> set[tuple[int, ...]]:
    """Engine output as index tuples, via object identity (duplicates stay apart)."""
    position = {id(event): index for index, event in enumerate(events)}
    return {tuple(position[id(p)] for p in flow.packets) for flow in flows}


# -- exhaustive permutation-ensemble oracles ---------------------------------
#
# Both compute the exact per-rank coverage-share summaries over ALL n!
# deployment orders. The literal version walks every permutation; the subset
# version exploits that the first r sensors of a uniform random order are a
# uniform random size-r subset, each appearing r!(n-r)! times among the n!
# orders, so percentiles over the full multiset can be taken from
# np.repeat-ed subset values. They must agree exactly; the subset form stays
# tractable to n ~ 10 where the literal one stops at ~7.

def _victim_masks(mapping):
    index: dict = {}
    masks = []
    for sensor in sorted(mapping):
        mask = 0
        for victim in mapping[sensor]:
            bit = index.setdefault(victim, len(index))
            mask |= 1 << bit
        masks.append(mask)
    return masks, len(index)


def _five_point(shares_by_rank):
    import numpy as np

    return tuple(
        np.array([fn(col) for col in shares_by_rank])
        for fn in (
            lambda c: c.min(),
            lambda c: np.percentile(c, 25),
            lambda c: np.percentile(c, 50),
            lambda c: np.percentile(c, 75),
            lambda c: c.max(),
        )
    )


def literal_rank_statistics(mapping):
    """min/q1/median/q3/max of coverage share per rank, via every permutation."""
    import itertools

    import numpy as np

    masks, union_size = _victim_masks(mapping)
    n = len(masks)
    rows = []
    for perm in itertools.permutations(range(n)):
        union = 0
        row = []
        for j in perm:
            union |= masks[j]
            row.append(union.bit_count())
        rows.append(row)
    counts = np.array(rows, dtype=float)
    shares = counts / union_size if union_size else np.ones_like(counts)
    return _five_point([shares[:, r] for r in range(n)])


def exhaustive_rank_statistics(mapping):
    """Same summaries via rank-r prefix subsets; exact and tractable to n ~ 10."""
    import itertools
    import math

    import numpy as np

    masks, union_size = _victim_masks(mapping)
    n = len(masks)
    shares_by_rank = []
    for r in range(1, n + 1):
        values = []
        for subset in itertools.combinations(range(n), r):
            union = 0
            for j in subset:
                union |= masks[j]
            values.append(union.bit_count())
        multiplicity = math.factorial(r) * math.factorial(n - r)
        counts = np.repeat(np.array(values, dtype=float), multiplicity)
        shares_by_rank.append(counts / union_size if union_size else np.ones_like(counts))
    return _five_point(shares_by_rank)
