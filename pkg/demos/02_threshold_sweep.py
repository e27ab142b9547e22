"""
Detection presets and the threshold sweep
=========================================

Six published honeypot pipelines differ in three knobs: the flow key, the
idle timeout, and the packet-load threshold. This demo runs every preset
over one synthetic trace, then sweeps timeout against load on a grid and
prints the resulting victim-count heatmap as text.
"""

from honeyflow import (
    PRESETS,
    AttackSpec,
    ScenarioSpec,
    detect_attacks,
    sweep,
    synth,
    victims,
)

spec = ScenarioSpec(
    seed=21,
    sensors=6,
    duration_s=2000.0,
    attacks=tuple(
        AttackSpec(
            victim=f"203.0.113.{i + 1}",
            dst_port=123,
            start=120.0 * i,
            stop=120.0 * i + 240.0,
            rate_pps=rate,
        )
        # a strong, a medium, and two weak attacks
        for i, rate in enumerate((1.0, 0.2, 0.05, 0.03))
    ),
    noise_packets=300,
)
corpus = synth(spec)
print(f"trace: {len(corpus.events)} events, {len(corpus.victims)} planted victims\n")

print(f"{'preset':12s} {'events':>6s} {'victims':>7s}")
for name, preset in PRESETS.items():
    attacks = detect_attacks(corpus.events, preset)
    print(f"{name:12s} {len(attacks):6d} {len(victims(attacks)):7d}")

# Sweep the CCC keying over a timeout x load grid. Victim counts grow down
# the timeout axis (flows merge) and shrink across the load axis.
timeouts = [30.0, 60.0, 300.0, 900.0]
loads = [1, 5, 20, 100]
grid = sweep(corpus.events, PRESETS["ccc"].scheme, timeouts, loads)

print("\nvictims by (timeout s, min packets):")
print(" " * 9 + "".join(f"{load:>6d}" for load in loads))
for i, timeout in enumerate(timeouts):
    row = "".join(f"{int(grid.victims[i, j]):>6d}" for j in range(len(loads)))
    print(f"{timeout:8g} {row}")
