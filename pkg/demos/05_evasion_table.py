"""
Staying under the radar: request rates per amplifier
====================================================

An attacker who wants a 1 Gbit/s flood without tripping honeypot
thresholds can spread the trigger requests across many amplifiers. This
demo computes, per reflection protocol, how many requests the whole
attack needs and how many land on each amplifier, then checks that
per-amplifier count against every detection pipeline.
"""

from honeyflow import (
    BUILTIN_PROFILES,
    PRESETS,
    EvasionScenario,
    detection_matrix,
    evasion_rows,
)

FLAGS = ("amppotmod", "ccc", "newkid", "hpi")

print("target: 1 Gbit/s for 300s, platform of 8 sensors\n")
header = f"{'protocol':9s} {'factor':>6s} {'amplifiers':>10s} {'reqs/attack':>11s} {'reqs/amp':>9s}"
print(header + "  " + "  ".join(f"{name:>9s}" for name in FLAGS))
for row in evasion_rows():
    verdicts = "  ".join(f"{'caught' if row[name] else 'missed':>9s}" for name in FLAGS)
    print(
        f"{row['protocol']:9s} {row['factor']:6g} {row['amplifiers']:10d} "
        f"{row['reqs_attack_millions']:10.1f}M {row['reqs_amplifier']:9d}  {verdicts}"
    )

# NTP slips past everything: 2.3M public NTP servers absorb the requests so
# each amplifier sees 2 packets. Platform-scoped pipelines sum over sensors,
# so their verdicts flip once the platform grows large enough.
ntp = next(p for p in BUILTIN_PROFILES if p.name == "NTP")
print("\nNTP verdict by platform size (amppotmod sums over its sensors):")
for sensors in (8, 64, 512):
    scenario = EvasionScenario(profile=ntp, platform_sensor_count=sensors)
    matrix = detection_matrix(scenario, presets=(PRESETS["amppotmod"],))
    cell = matrix["amppotmod"]
    print(
        f"  {sensors:4d} sensors: {cell.count_compared} requests vs "
        f"threshold {cell.bound} -> {'caught' if cell.detected else 'missed'}"
    )
