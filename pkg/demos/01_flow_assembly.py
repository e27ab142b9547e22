"""
Packet events into flows: keying schemes and idle timeouts
==========================================================

A honeypot trace is a flat list of packet events. Everything downstream
works on *flows*: events grouped by a key and split wherever the gap
between consecutive packets exceeds an idle timeout. This demo builds a
small labeled trace and shows how the keying scheme and the timeout
change what a "flow" is.
"""

from honeyflow import (
    PRESETS,
    AttackSpec,
    ScenarioSpec,
    assemble,
    synth,
)

# Two attacks against the same victim, 20 minutes apart, plus background noise.
spec = ScenarioSpec(
    seed=7,
    sensors=4,
    duration_s=3000.0,
    attacks=(
        AttackSpec(victim="203.0.113.9", dst_port=123, start=0.0, stop=300.0, rate_pps=0.2),
        AttackSpec(victim="203.0.113.9", dst_port=123, start=1500.0, stop=1800.0, rate_pps=0.2),
    ),
    noise_packets=40,
)
corpus = synth(spec)
print(f"trace: {len(corpus.events)} packet events on {len(corpus.sensor_ids)} sensors")

# The same events under two published keyings. CCC keys flows per sensor by
# (src, dst, dst_port); AmpPot merges across the whole platform by (src, dst_port).
for name in ("ccc", "amppot"):
    preset = PRESETS[name]
    flows = assemble(corpus.events, preset.scheme, preset.thresholds.idle_timeout)
    print(f"\n{name}: scope={preset.scheme.scope}, timeout={preset.thresholds.idle_timeout:g}s")
    print(f"  {len(flows)} flows")
    attack_flows = [f for f in flows if f.key.src == "203.0.113.9"]
    for flow in attack_flows:
        print(
            f"  victim flow: {flow.packet_count} packets, "
            f"[{flow.first_ts:.0f}s, {flow.last_ts:.0f}s], "
            f"sensors={sorted(flow.sensors)}"
        )

# The 1200 s pause between the two attacks sits below AmpPot's 3600 s timeout,
# so AmpPot sees one long flow per its platform key while a short timeout splits it.
print("\nsame keying, shrinking timeout:")
scheme = PRESETS["amppot"].scheme
for timeout in (3600.0, 600.0):
    flows = assemble(corpus.events, scheme, timeout)
    n = sum(1 for f in flows if f.key.src == "203.0.113.9")
    print(f"  timeout {timeout:6g}s -> {n} victim flow(s)")
