"""Sweep DRAM/NVM capacity configurations against energy budgets.

Reproduces the classic experiment layout: one curve per hybrid-memory
configuration (DRAM GiB : NVM GiB), swept over energy ratios. Emits a CSV
you can plot with anything; if matplotlib is importable a PNG is saved
too. The same sweep is available from the command line as
``memplan sweep``.
"""

import csv
import sys

from memplan import (GIB, GeneratorSpec, evaluate, generate_synthetic,
                     sweep_ratios, testbed1)

MB = 1 << 20

profiles = generate_synthetic(
    GeneratorSpec(count=14, skew_count=5, skew_share=0.99,
                  size_range=(1 * MB, 8 * MB)), seed=21)
ratios = [1.0, 0.9, 0.8, 0.7, 0.65, 0.6]
configs = [(2.0, 6.0), (1.0, 6.0), (0.5, 6.0)]

rows = []
for dram_gib, nvm_gib in configs:
    dev = testbed1(dram_capacity=dram_gib * GIB, nvm_capacity=nvm_gib * GIB)
    for ratio, plan in zip(ratios,
                           sweep_ratios(profiles, dev, ratios,
                                        major_threshold=0)):
        entry = {"config": f"({dram_gib:g}, {nvm_gib:g})",
                 "ratio": ratio, "status": plan.status,
                 "latency_ms": None, "energy_ratio": None}
        if plan.feasible:
            report = evaluate(profiles, dev, plan)
            entry["latency_ms"] = plan.objective_ns * 1e-6
            entry["energy_ratio"] = report.energy_ratio_vs_all_dram
        rows.append(entry)

out = "sweep_demo.csv"
with open(out, "w", newline="") as handle:
    writer = csv.DictWriter(handle, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
print(f"wrote {len(rows)} rows to {out}")

for config in dict.fromkeys(r["config"] for r in rows):
    print(f"\nHMMS{config}:")
    for r in rows:
        if r["config"] != config:
            continue
        if r["status"] != "optimal":
            print(f"  R={r['ratio']:.2f}  infeasible")
        else:
            print(f"  R={r['ratio']:.2f}  latency {r['latency_ms']:8.1f} ms"
                  f"  energy {r['energy_ratio']:.3f} of all-DRAM")

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit(0)

fig, ax = plt.subplots(figsize=(6, 4))
for config in dict.fromkeys(r["config"] for r in rows):
    xs = [r["ratio"] for r in rows
          if r["config"] == config and r["status"] == "optimal"]
    ys = [r["latency_ms"] for r in rows
          if r["config"] == config and r["status"] == "optimal"]
    ax.plot(xs, ys, marker="o", label=f"HMMS{config} GiB")
ax.set_xlabel("energy ratio R (fraction of all-DRAM energy)")
ax.set_ylabel("planned latency (ms)")
ax.invert_xaxis()
ax.legend()
fig.tight_layout()
fig.savefig("sweep_demo.png", dpi=120)
print("wrote sweep_demo.png")
