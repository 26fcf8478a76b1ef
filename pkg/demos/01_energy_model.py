"""Price the same heap objects on DRAM and on STT-RAM.

DRAM charges activate/precharge + read/write energy per accessed byte and
refresh energy on the whole footprint for as long as the object lives.
STT-RAM charges activate/precharge + row-buffer access per accessed byte
plus write-backs for dirty cache blocks, and nothing while idle. The
crossover this creates is the whole game: big long-lived objects with
light traffic are cheap on STT-RAM, hot objects are cheap wherever their
traffic is cheap.
"""

from memplan import DeviceSpec, ObjectProfile, dram_energy, nvm_energy

MB = 1 << 20

dev = DeviceSpec()  # Table-default energy constants, 64 ms refresh period
print("energy constants (nJ/byte):")
print(f"  DRAM act+pre {dev.dram_act_pre}, rd/wr {dev.dram_rw}, "
      f"refresh {dev.dram_ref} per {dev.refresh_period * 1e3:.0f} ms")
print(f"  STT-RAM act+pre {dev.nvm_act_pre}, row-buffer {dev.nvm_rba}, "
      f"write-back {dev.nvm_wb}")
print()

# Three archetypes: a hot scratch buffer, a balanced mid-size object, and
# a big cold structure that mostly just sits there.
objects = [
    ObjectProfile("hot_buffer", size=4 * MB, alloc_time=0.0,
                  dealloc_time=2.0, accessed_volume=512 * MB,
                  llc_misses=2e6, dirty_blocks=4e4),
    ObjectProfile("mid_table", size=64 * MB, alloc_time=0.0,
                  dealloc_time=20.0, accessed_volume=128 * MB,
                  llc_misses=5e5, dirty_blocks=2e4),
    ObjectProfile("cold_giant", size=800 * MB, alloc_time=0.0,
                  dealloc_time=120.0, accessed_volume=64 * MB,
                  llc_misses=1e5, dirty_blocks=1e4),
]

print(f"{'object':<12} {'DRAM mJ':>12} {'STT-RAM mJ':>12} {'ratio':>8}")
for obj in objects:
    de = dram_energy(obj, dev) * 1e-6
    ne = nvm_energy(obj, dev) * 1e-6
    print(f"{obj.id:<12} {de:>12.2f} {ne:>12.2f} {de / ne:>8.1f}x")

print()
print("The cold giant pays almost all of its DRAM bill in refresh:")
giant = objects[-1]
refresh = dev.refresh_rate * giant.size * giant.lifetime
total = dram_energy(giant, dev)
print(f"  refresh share of its DRAM energy: {refresh / total:.1%}")
print("STT-RAM has no refresh term, so parking it there erases that bill")
print("at the price of slower accesses on its (few) LLC misses.")
