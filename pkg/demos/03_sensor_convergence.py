"""
How many sensors are enough?
============================

Each sensor of a honeypot platform observes some set of attack victims.
Deploying sensors one by one traces a coverage curve toward the union.
Three views on that curve:

* a greedy best-case deployment order,
* the spread over random deployment orders (permutation ensemble),
* a capture-recapture estimate of the victims nobody observed.
"""

import random

from honeyflow import (
    capture_recapture,
    greedy_order,
    permutation_ensemble,
    stability_trace,
    synth_sensor_victim_map,
)

# 20 sensors, 5000 victims, each sensor seeing a random 12% subset.
mapping = synth_sensor_victim_map(20, 5000, coverage=0.12, seed=3)
union = set().union(*mapping.values())
print(f"{len(mapping)} sensors, union covers {len(union)} of 5000 victims")

curve = greedy_order(mapping)
print("\ngreedy deployment (first 5 ranks):")
for rank in range(5):
    print(
        f"  {rank + 1}: +{curve.new_victims[rank]:4d} via {curve.sensors[rank]}, "
        f"cumulative {curve.cumulative[rank]} ({curve.shares[rank]:.1%})"
    )

# Random orders bracket the greedy one. The quartile band narrows with rank
# and every order ends at the union by construction.
stats = permutation_ensemble(mapping, n_permutations=5000, seed=0)
print("\nrandom-order coverage share by rank (5000 permutations):")
print(f"{'rank':>4s} {'min':>7s} {'median':>7s} {'max':>7s}")
for rank in (1, 5, 10, 15, 20):
    i = rank - 1
    print(f"{rank:4d} {stats.mins[i]:7.1%} {stats.medians[i]:7.1%} {stats.maxs[i]:7.1%}")

# How many samples did those statistics need? Track the largest relative
# change per batch; the estimate is stable once the deltas stay small.
points = stability_trace(mapping, batch=500, max_permutations=5000, seed=0)
print("\nensemble stability (median delta per 500-sample batch):")
for point in points[1:4]:
    print(f"  after {point.n_permutations:5d}: {point.dmedian:.4%}")

# Two sensors are two independent-ish samples of the victim population.
# Lincoln-Petersen estimates the total from their overlap.
rng = random.Random(9)
sensors = rng.sample(sorted(mapping), 2)
a, b = mapping[sensors[0]], mapping[sensors[1]]
estimate = capture_recapture(a, b)
print(
    f"\ncapture-recapture from {sensors[0]} ({len(a)}) and {sensors[1]} ({len(b)}): "
    f"~{estimate} victims (true 5000, union saw {len(union)})"
)
