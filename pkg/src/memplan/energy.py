"""Per-object energy model for a DRAM + STT-RAM hybrid memory.

Energy is charged per byte of memory-command traffic. An object living in
DRAM pays activate/precharge and read/write energy on every accessed byte
plus refresh energy on its footprint for as long as it is allocated. The
same object in STT-RAM pays activate/precharge and row-buffer-access energy
on accessed bytes plus write-back energy for the dirty cache blocks flushed
on row-buffer conflicts; there is no idle or refresh term.

The refresh constant is specified per refresh event, so the model converts
it to a rate by dividing by the refresh period (64 ms by default). Setting
``refresh_period`` to 1.0 recovers the raw per-second reading of the
formula.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from dataclasses import asdict, dataclass, replace
from typing import IO

from .profiles import ObjectProfile, ProfileSet

GIB = 1 << 30

DEVICE_FORMAT_VERSION = "hmms-device-v1"


@dataclass(frozen=True)
class DeviceSpec:
    """Energy constants, latencies, and capacities of the two devices.

    Energies are nJ per byte, latencies ns per LLC-miss access, capacities
    bytes, the refresh period seconds. ``dram_latency`` and ``nvm_latency``
    are the effective (read) per-access latencies; the optional write
    latencies are used only when whole objects are copied between devices.
    """

    dram_act_pre: float = 3.07
    dram_rw: float = 1.19
    dram_ref: float = 0.35
    nvm_act_pre: float = 2.68
    nvm_rba: float = 1.00
    nvm_wb: float = 2.83
    refresh_period: float = 0.064
    cache_block_size: float = 64.0
    dram_latency: float = 200.0
    nvm_latency: float = 640.0
    dram_write_latency: float | None = None
    nvm_write_latency: float | None = None
    dram_capacity: float = 16 * GIB
    nvm_capacity: float = 16 * GIB

    def __post_init__(self) -> None:
        for name in ("dram_act_pre", "dram_rw", "dram_ref", "nvm_act_pre",
                     "nvm_rba", "nvm_wb", "dram_latency", "nvm_latency",
                     "dram_capacity", "nvm_capacity"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"{name} must be finite and >= 0")
        for name in ("dram_write_latency", "nvm_write_latency"):
            value = getattr(self, name)
            if value is not None and (not math.isfinite(value) or value < 0):
                raise ValueError(f"{name} must be finite and >= 0")
        if not self.refresh_period > 0:
            raise ValueError("refresh_period must be positive")
        if not self.cache_block_size > 0:
            raise ValueError("cache_block_size must be positive")
        if self.dram_latency > self.nvm_latency:
            warnings.warn(
                "dram_latency exceeds nvm_latency; placement objectives will "
                "favor NVM", stacklevel=2)

    @property
    def dram_read_latency(self) -> float:
        return self.dram_latency

    @property
    def nvm_read_latency(self) -> float:
        return self.nvm_latency

    @property
    def effective_dram_write_latency(self) -> float:
        return self.dram_latency if self.dram_write_latency is None \
            else self.dram_write_latency

    @property
    def effective_nvm_write_latency(self) -> float:
        return self.nvm_latency if self.nvm_write_latency is None \
            else self.nvm_write_latency

    @property
    def refresh_rate(self) -> float:
        """Refresh energy in nJ per byte per second of residency."""
        return self.dram_ref / self.refresh_period

    def with_capacities(self, dram_capacity: float,
                        nvm_capacity: float) -> "DeviceSpec":
        return replace(self, dram_capacity=dram_capacity,
                       nvm_capacity=nvm_capacity)


def testbed1(dram_capacity: float = 16 * GIB,
             nvm_capacity: float = 16 * GIB) -> DeviceSpec:
    """IBM-server-like preset: DRAM 200 ns, STT-RAM 640 ns read / 1440 ns write."""
    return DeviceSpec(dram_latency=200.0, nvm_latency=640.0,
                      dram_write_latency=200.0, nvm_write_latency=1440.0,
                      dram_capacity=dram_capacity, nvm_capacity=nvm_capacity)


def testbed2(dram_capacity: float = 8 * GIB,
             nvm_capacity: float = 16 * GIB) -> DeviceSpec:
    """NUMA-server-like preset: DRAM 400 ns, STT-RAM 840 ns read / 1640 ns write."""
    return DeviceSpec(dram_latency=400.0, nvm_latency=840.0,
                      dram_write_latency=400.0, nvm_write_latency=1640.0,
                      dram_capacity=dram_capacity, nvm_capacity=nvm_capacity)


PRESETS = {"testbed1": testbed1, "testbed2": testbed2}


def load_device_spec(source: str | os.PathLike | IO[str]) -> DeviceSpec:
    """Read a DeviceSpec from a JSON config whose keys mirror the fields."""
    if hasattr(source, "read"):
        data = json.load(source)
    else:
        with open(source, "r", encoding="utf-8") as handle:
            data = json.load(handle)
    if not isinstance(data, dict):
        raise ValueError("device spec file must contain a JSON object")
    data.pop("format", None)
    known = set(DeviceSpec.__dataclass_fields__)
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown device spec fields: {sorted(unknown)}")
    return DeviceSpec(**data)


def write_device_spec(dev: DeviceSpec, dest: str | os.PathLike | IO[str]) -> None:
    payload = {"format": DEVICE_FORMAT_VERSION, **asdict(dev)}
    if hasattr(dest, "write"):
        json.dump(payload, dest, indent=2, sort_keys=True)
        dest.write("\n")
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def dram_energy(obj: ObjectProfile, dev: DeviceSpec) -> float:
    """nJ consumed over the object's lifetime if it lives in DRAM."""
    traffic = (dev.dram_act_pre + dev.dram_rw) * obj.accessed_volume
    refresh = dev.refresh_rate * obj.size * obj.lifetime
    return traffic + refresh


def nvm_energy(obj: ObjectProfile, dev: DeviceSpec) -> float:
    """nJ consumed over the object's lifetime if it lives in STT-RAM."""
    traffic = (dev.nvm_act_pre + dev.nvm_rba) * obj.accessed_volume
    writeback = dev.nvm_wb * obj.dirty_blocks * dev.cache_block_size
    return traffic + writeback


@dataclass(frozen=True)
class EnergyEstimate:
    """Per-object energies on each device plus set-wide totals."""

    dram: dict[str, float]
    nvm: dict[str, float]
    total_dram: float
    total_nvm: float

    def __post_init__(self) -> None:
        if set(self.dram) != set(self.nvm):
            raise ValueError("per-device energy maps must cover the same objects")


def estimate_all(profiles: ProfileSet, dev: DeviceSpec) -> EnergyEstimate:
    """Energy of every object on both devices.

    ``total_dram`` is the all-DRAM baseline that energy budgets are
    expressed against.
    """
    dram = {obj.id: dram_energy(obj, dev) for obj in profiles}
    nvm = {obj.id: nvm_energy(obj, dev) for obj in profiles}
    return EnergyEstimate(dram=dram, nvm=nvm,
                          total_dram=sum(dram.values()),
                          total_nvm=sum(nvm.values()))
