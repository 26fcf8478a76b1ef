"""Extrapolate profiles to a bigger workload instead of re-profiling.

Profiling is expensive, but most scientific objects scale predictably
with the workload size. From a few profiled sizes we fit one average
gradient per object and pattern (size, accessed volume, misses, dirty
blocks, lifetime), then project the largest profiled set forward and plan
on the projection. Here the "actual" big workload is known, so we can
check the projected plan against the plan on the real thing.
"""

from memplan import (GIB, ObjectProfile, ProfileSet,
                     derive_scaling_vector, extrapolate, plan_static,
                     testbed1)

MB = 1 << 20

# Profiles at workload sizes 1 and 2 (think: two profiled input decks).
names = ["grid", "halo", "coeffs", "scratch", "log"]
base_sizes = [96, 48, 24, 16, 2]          # MB at workload 1
growth = [64, 32, 4, 12, 0]               # MB per workload unit


def family_member(workload):
    objects = []
    for name, s0, g in zip(names, base_sizes, growth):
        size = (s0 + g * (workload - 1)) * MB
        objects.append(ObjectProfile(
            name, size, 0.0, 10.0 + 2.0 * (workload - 1),
            accessed_volume=4 * size, llc_misses=size / 256,
            dirty_blocks=size / 8192))
    return ProfileSet(tuple(objects), f"workload-{workload:g}",
                      float(workload))


profiled = [family_member(1.0), family_member(2.0)]
actual_big = family_member(4.0)

vector = derive_scaling_vector(profiled)
print("fitted size gradients (MB per workload unit):")
for name in names:
    print(f"  {name:<8} {vector.for_object(name)['size'] / MB:6.1f}")

projected = extrapolate(profiled[-1], vector, 4.0)
print("\nprojected vs actual object sizes at workload 4:")
for name in names:
    print(f"  {name:<8} projected {projected.get(name).size / MB:7.1f} MB"
          f"   actual {actual_big.get(name).size / MB:7.1f} MB")

dev = testbed1(dram_capacity=0.25 * GIB, nvm_capacity=2 * GIB)
plan_projected = plan_static(projected, dev, 0.8, major_threshold=0)
plan_actual = plan_static(actual_big, dev, 0.8, major_threshold=0)

print("\nplacements at R=0.8:")
print(f"{'object':<8} {'from projection':>16} {'from real profile':>18}")
agreement = 0
for name in names:
    a = plan_projected.placements[name]
    b = plan_actual.placements[name]
    agreement += a == b
    print(f"{name:<8} {a:>16} {b:>18}")
print(f"\n{agreement}/{len(names)} placements agree, with zero "
      "re-profiling cost for the bigger workload.")
