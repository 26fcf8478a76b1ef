"""Static placement planning under an energy budget.

Given object profiles, device constants, and an energy ratio R, picks a
DRAM/NVM home for every major object so that total LLC-miss latency is
minimized while the set's energy stays within R times the energy it would
consume living entirely in DRAM. Minor objects (accessed volume at or
below the threshold) are pinned to DRAM and their footprint is deducted
from DRAM capacity before solving; their energy is excluded from both
sides of the budget unless ``include_minor_in_budget`` is set.

Infeasibility is a first-class result: the returned plan carries the
constraint subset that cannot be satisfied rather than raising.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import IO, Sequence

import numpy as np

from . import ilp
from .energy import DeviceSpec, dram_energy, nvm_energy
from .profiles import DEFAULT_MAJOR_THRESHOLD, ProfileSet, filter_major

DRAM = "dram"
NVM = "nvm"

PLAN_FORMAT_VERSION = "hmms-plan-v1"

CONSTRAINT_CAPACITY_DRAM = "capacity_dram"
CONSTRAINT_CAPACITY_NVM = "capacity_nvm"
CONSTRAINT_ENERGY = "energy_budget"


class CapacityError(ValueError):
    """DRAM cannot hold even the objects that are forced onto it."""


@dataclass(frozen=True)
class PlacementPlan:
    """Device assignment for every object plus the achieved totals.

    ``placements`` maps object id to "dram" or "nvm" (minor objects always
    "dram"); totals cover the major objects, matching the budget's
    population. Baseline strategies produce plans too, with ``ratio`` and
    ``energy_budget_nj`` set to the values they achieved.
    """

    placements: dict[str, str]
    major_ids: tuple[str, ...]
    status: str
    ratio: float
    major_threshold: float
    objective_ns: float
    planned_energy_nj: float
    energy_budget_nj: float
    reserved_dram_bytes: float = 0.0
    minor_energy_in_budget: bool = False
    binding_constraints: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status == ilp.STATUS_OPTIMAL

    def device_of(self, object_id: str) -> str:
        return self.placements[object_id]


def _major_minor(profiles: ProfileSet, major_threshold: float,
                 reserved_dram_bytes: float, dev: DeviceSpec
                 ) -> tuple[ProfileSet, ProfileSet, float]:
    """Split the set and return the DRAM capacity left for major objects."""
    major, minor = filter_major(profiles, major_threshold)
    pinned = sum(o.size for o in minor) + reserved_dram_bytes
    dram_free = dev.dram_capacity - pinned
    if dram_free < 0:
        raise CapacityError(
            f"DRAM-pinned bytes ({pinned:.0f}) exceed DRAM capacity "
            f"({dev.dram_capacity:.0f})")
    return major, minor, dram_free


def _normalized(coeffs: np.ndarray, bound: float) -> tuple[tuple[float, ...], float]:
    # Unit-magnitude rows keep nano-joule and byte scales from swamping the
    # solver's tolerances.
    scale = float(np.max(np.abs(coeffs))) if len(coeffs) else 0.0
    if scale > 0:
        return tuple(coeffs / scale), bound / scale
    return tuple(coeffs), bound


def build_placement_program(major: ProfileSet, dev: DeviceSpec,
                            ratio: float, dram_free: float,
                            extra_budget_energy: float = 0.0
                            ) -> tuple[ilp.ZeroOneProgram, float]:
    """ILP over the major objects; returns (program, objective offset).

    Variables are 1 for DRAM, 0 for NVM, in profile order. The objective is
    expressed as ``offset + c.x`` with the offset carrying the all-NVM
    latency so the program stays a plain minimization.
    """
    de = np.array([dram_energy(o, dev) for o in major])
    ne = np.array([nvm_energy(o, dev) for o in major])
    sizes = np.array([o.size for o in major])
    misses = np.array([o.llc_misses for o in major])

    objective = (dev.dram_latency - dev.nvm_latency) * misses
    offset = float(dev.nvm_latency * misses.sum())
    scale = float(np.max(np.abs(objective))) if len(objective) else 0.0
    scaled_objective = objective / scale if scale > 0 else objective

    budget = ratio * (float(de.sum()) + extra_budget_energy)
    constraints = (
        _normalized(sizes, dram_free),
        _normalized(-sizes, dev.nvm_capacity - float(sizes.sum())),
        _normalized(de - ne, budget - float(ne.sum()) - extra_budget_energy),
    )
    names = tuple(o.id for o in major)
    program = ilp.ZeroOneProgram(tuple(scaled_objective), constraints, names)
    return program, offset


_CONSTRAINT_NAMES = (CONSTRAINT_CAPACITY_DRAM, CONSTRAINT_CAPACITY_NVM,
                     CONSTRAINT_ENERGY)


def diagnose_infeasibility(program: ilp.ZeroOneProgram,
                           names: Sequence[str] = _CONSTRAINT_NAMES
                           ) -> tuple[str, ...]:
    """Smallest leading constraint subsets that are separately infeasible.

    Checks each constraint alone, then the full set; the returned names are
    the ones that cannot be satisfied (jointly if each is fine alone).
    """
    n = program.num_variables
    singles = []
    for i, constraint in enumerate(program.constraints):
        sub = ilp.ZeroOneProgram(program.objective_coeffs, (constraint,),
                                 program.variable_names)
        if ilp.solve(sub).status == ilp.STATUS_INFEASIBLE:
            singles.append(names[i] if i < len(names) else f"constraint {i}")
    if singles:
        return tuple(singles)
    return tuple(names[:len(program.constraints)])


def summarize_assignment(major: ProfileSet, dev: DeviceSpec,
                         on_dram: Sequence[int]) -> tuple[float, float]:
    """(latency objective ns, energy nJ) of a concrete major-object split."""
    objective = 0.0
    energy = 0.0
    for obj, x in zip(major, on_dram):
        if x:
            objective += dev.dram_latency * obj.llc_misses
            energy += dram_energy(obj, dev)
        else:
            objective += dev.nvm_latency * obj.llc_misses
            energy += nvm_energy(obj, dev)
    return objective, energy


def plan_static(profiles: ProfileSet, dev: DeviceSpec, ratio: float,
                major_threshold: float = DEFAULT_MAJOR_THRESHOLD,
                reserved_dram_bytes: float = 0.0,
                include_minor_in_budget: bool = False) -> PlacementPlan:
    """Optimal static placement at energy ratio ``ratio``.

    Raises CapacityError when the DRAM-pinned minor objects alone exceed
    DRAM capacity; every other unsatisfiable combination is reported as an
    infeasible plan naming the binding constraints.
    """
    if not (math.isfinite(ratio) and ratio > 0):
        raise ValueError("energy ratio must be finite and > 0")
    if reserved_dram_bytes < 0:
        raise ValueError("reserved_dram_bytes must be >= 0")
    major, minor, dram_free = _major_minor(profiles, major_threshold,
                                           reserved_dram_bytes, dev)
    extra = sum(dram_energy(o, dev) for o in minor) if include_minor_in_budget \
        else 0.0
    program, offset = build_placement_program(major, dev, ratio, dram_free,
                                              extra_budget_energy=extra)
    solution = ilp.solve(program)

    placements = {o.id: DRAM for o in minor}
    de_total = sum(dram_energy(o, dev) for o in major) + extra
    budget = ratio * de_total
    if solution.status == ilp.STATUS_INFEASIBLE:
        return PlacementPlan(
            placements=placements,
            major_ids=tuple(o.id for o in major),
            status=ilp.STATUS_INFEASIBLE,
            ratio=ratio,
            major_threshold=major_threshold,
            objective_ns=float("nan"),
            planned_energy_nj=float("nan"),
            energy_budget_nj=budget,
            reserved_dram_bytes=reserved_dram_bytes,
            minor_energy_in_budget=include_minor_in_budget,
            binding_constraints=diagnose_infeasibility(program),
        )

    for obj, x in zip(major, solution.assignment):
        placements[obj.id] = DRAM if x else NVM
    objective, energy = summarize_assignment(major, dev, solution.assignment)
    return PlacementPlan(
        placements=placements,
        major_ids=tuple(o.id for o in major),
        status=ilp.STATUS_OPTIMAL,
        ratio=ratio,
        major_threshold=major_threshold,
        objective_ns=objective,
        planned_energy_nj=energy + extra,
        energy_budget_nj=budget,
        reserved_dram_bytes=reserved_dram_bytes,
        minor_energy_in_budget=include_minor_in_budget,
    )


def sweep_ratios(profiles: ProfileSet, dev: DeviceSpec,
                 ratios: Sequence[float],
                 major_threshold: float = DEFAULT_MAJOR_THRESHOLD,
                 reserved_dram_bytes: float = 0.0,
                 include_minor_in_budget: bool = False) -> list[PlacementPlan]:
    """One plan (or infeasibility marker) per ratio, in the given order."""
    if not ratios:
        raise ValueError("ratio sweep needs at least one ratio")
    plans = []
    for ratio in ratios:
        try:
            plans.append(plan_static(
                profiles, dev, ratio, major_threshold,
                reserved_dram_bytes=reserved_dram_bytes,
                include_minor_in_budget=include_minor_in_budget))
        except CapacityError:
            plans.append(PlacementPlan(
                placements={},
                major_ids=(),
                status=ilp.STATUS_INFEASIBLE,
                ratio=ratio,
                major_threshold=major_threshold,
                objective_ns=float("nan"),
                planned_energy_nj=float("nan"),
                energy_budget_nj=float("nan"),
                reserved_dram_bytes=reserved_dram_bytes,
                minor_energy_in_budget=include_minor_in_budget,
                binding_constraints=(CONSTRAINT_CAPACITY_DRAM,),
            ))
    return plans


def _format_float(x: float) -> str:
    return repr(float(x))


def write_plan(plan: PlacementPlan, dest: str | os.PathLike | IO[str]) -> None:
    """Serialize a plan as the placement-table text format."""
    if hasattr(dest, "write"):
        _write_plan_stream(plan, dest)
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as handle:
        _write_plan_stream(plan, handle)


def _write_plan_stream(plan: PlacementPlan, stream: IO[str]) -> None:
    stream.write(PLAN_FORMAT_VERSION + "\n")
    stream.write(f"status={plan.status}\n")
    stream.write(f"ratio={_format_float(plan.ratio)}\n")
    stream.write(f"major_threshold_bytes={_format_float(plan.major_threshold)}\n")
    stream.write(f"reserved_dram_bytes={_format_float(plan.reserved_dram_bytes)}\n")
    stream.write(f"minor_energy_in_budget={int(plan.minor_energy_in_budget)}\n")
    stream.write(f"objective_ns={_format_float(plan.objective_ns)}\n")
    stream.write(f"planned_energy_nj={_format_float(plan.planned_energy_nj)}\n")
    stream.write(f"energy_budget_nj={_format_float(plan.energy_budget_nj)}\n")
    stream.write(f"binding={';'.join(plan.binding_constraints)}\n")
    stream.write("id,device,major\n")
    major = set(plan.major_ids)
    for object_id, device in plan.placements.items():
        stream.write(f"{object_id},{device},{int(object_id in major)}\n")
    for object_id in plan.major_ids:
        if object_id not in plan.placements:
            stream.write(f"{object_id},unassigned,1\n")


def load_plan(source: str | os.PathLike | IO[str]) -> PlacementPlan:
    if hasattr(source, "read"):
        return _load_plan_stream(source)
    with open(source, "r", encoding="utf-8") as handle:
        return _load_plan_stream(handle)


def _load_plan_stream(stream: IO[str]) -> PlacementPlan:
    lines = stream.read().splitlines()
    if not lines or lines[0].strip() != PLAN_FORMAT_VERSION:
        raise ValueError(f"expected plan header {PLAN_FORMAT_VERSION!r}")
    summary: dict[str, str] = {}
    i = 1
    while i < len(lines) and "=" in lines[i]:
        key, _, value = lines[i].partition("=")
        summary[key.strip()] = value.strip()
        i += 1
    if i >= len(lines) or lines[i].strip() != "id,device,major":
        raise ValueError("plan file is missing the id,device,major table")
    placements: dict[str, str] = {}
    major_ids: list[str] = []
    for line in lines[i + 1:]:
        line = line.strip()
        if not line:
            continue
        object_id, device, major_flag = line.split(",")
        if device not in (DRAM, NVM, "unassigned"):
            raise ValueError(f"unknown device {device!r} for {object_id!r}")
        if device != "unassigned":
            placements[object_id] = device
        if major_flag == "1":
            major_ids.append(object_id)
    binding = tuple(p for p in summary.get("binding", "").split(";") if p)
    return PlacementPlan(
        placements=placements,
        major_ids=tuple(major_ids),
        status=summary["status"],
        ratio=float(summary["ratio"]),
        major_threshold=float(summary["major_threshold_bytes"]),
        objective_ns=float(summary["objective_ns"]),
        planned_energy_nj=float(summary["planned_energy_nj"]),
        energy_budget_nj=float(summary["energy_budget_nj"]),
        reserved_dram_bytes=float(summary.get("reserved_dram_bytes", "0")),
        minor_energy_in_budget=summary.get("minor_energy_in_budget", "0") == "1",
        binding_constraints=binding,
    )
