"""Why a single miss-rate threshold is not enough.

The LLC-MPKI baseline sends every object with a miss rate above one
threshold to DRAM. That rule cannot see refresh costs: a huge, long-lived
object with a middling miss rate clears the threshold and then quietly
burns energy being refreshed. The optimizing planner, handed the exact
energy the baseline spent as its budget, flips precisely that object to
STT-RAM and wins on energy without losing latency.

Also shows the threshold-search problem: energy as a function of the
threshold moves in irregular steps, so hitting a target budget means
re-running a search per target, while the planner takes the budget as a
direct input.
"""

from memplan import (GIB, ObjectProfile, ProfileSet, compare, evaluate,
                     place_mpki_threshold, plan_static, testbed1)

MB = 1 << 20

objects = (
    ObjectProfile("graph", 826 * MB, 0.0, 100.0, 100 * MB, 1.0e5, 2.0e4, 0.030),
    ObjectProfile("frontier", 96 * MB, 0.0, 100.0, 900 * MB, 6.0e6, 1.0e5, 0.210),
    ObjectProfile("visited", 64 * MB, 0.0, 100.0, 700 * MB, 4.5e6, 8.0e4, 0.150),
    ObjectProfile("queue", 48 * MB, 0.0, 100.0, 500 * MB, 3.0e6, 6.0e4, 0.020),
    ObjectProfile("parents", 32 * MB, 10.0, 90.0, 300 * MB, 2.0e6, 4.0e4, 0.015),
)
profiles = ProfileSet(objects, "bfs-like")
dev = testbed1(dram_capacity=2 * GIB, nvm_capacity=16 * GIB)

threshold_plan = place_mpki_threshold(profiles, dev, 0.025)
baseline = evaluate(profiles, dev, threshold_plan)
print("threshold rule (mpki >= 0.025 -> DRAM):")
for i in profiles.ids():
    print(f"  {i:<9} mpki={profiles.get(i).llc_mpki:.3f} -> "
          f"{threshold_plan.placements[i]}")
print(f"  energy {baseline.energy_ratio_vs_all_dram:.3f} of all-DRAM, "
      f"latency {baseline.latency_objective_ns * 1e-6:.0f} ms")

matched = plan_static(profiles, dev, baseline.energy_ratio_vs_all_dram)
optimal = evaluate(profiles, dev, matched)
print("\noptimal plan at the baseline's own energy budget:")
for i in profiles.ids():
    marker = "  <- flipped" \
        if matched.placements[i] != threshold_plan.placements[i] else ""
    print(f"  {i:<9} -> {matched.placements[i]}{marker}")
print(f"  energy {optimal.energy_ratio_vs_all_dram:.3f} of all-DRAM, "
      f"latency {optimal.latency_objective_ns * 1e-6:.0f} ms")

print("\nthreshold search on this instance (energy vs threshold):")
thresholds = [0.005, 0.01, 0.018, 0.025, 0.05, 0.1, 0.18, 0.25]
rows = compare(profiles, dev,
               [(f"thr={t:g}", place_mpki_threshold(profiles, dev, t))
                for t in thresholds])
for row in rows:
    print(f"  {row.plan:<10} energy {row.ratio:.3f}  "
          f"latency {row.latency_ns * 1e-6:7.0f} ms")
print("\nNo smooth knob: a budget target means searching this table, and")
print("repeating the search every time the budget moves.")
