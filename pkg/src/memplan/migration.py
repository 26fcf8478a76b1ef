"""Mid-run replanning when the energy requirement changes.

At time t the budget changes to a new ratio. Objects already freed cannot
be helped, objects not yet allocated will simply follow a fresh static
plan, and for everything currently live the planner weighs keeping the
object where it is against copying it to the other device. A migration
pays for reading the whole object from the source and writing it to the
destination, plus DRAM refresh accrued while the copy is in flight, and it
costs one source-read plus one destination-write latency per cache block.

In strict mode the new budget is a hard limit: if no migration vector can
satisfy it the current placement is retained and the plan reports
infeasible. In best-effort mode the requirement is simply "no worse than
doing nothing", which the all-zero migration vector always satisfies.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import IO, Sequence
import os

import numpy as np

from . import ilp
from .energy import DeviceSpec, dram_energy, nvm_energy
from .planner import (DRAM, NVM, CapacityError, PlacementPlan, plan_static,
                      CONSTRAINT_CAPACITY_DRAM, CONSTRAINT_CAPACITY_NVM,
                      CONSTRAINT_ENERGY, diagnose_infeasibility, _normalized)
from .profiles import ObjectProfile, ProfileSet, filter_major

MIGRATION_FORMAT_VERSION = "hmms-migration-v1"

_NS_PER_S = 1e9


@dataclass(frozen=True)
class MigrationRequest:
    """A change of the energy requirement at ``time`` seconds into the run.

    ``strict`` makes ``new_ratio`` a hard limit; otherwise the request just
    asks for energy no worse than leaving every object in place.
    """

    time: float
    new_ratio: float
    strict: bool = True

    def __post_init__(self) -> None:
        if not (math.isfinite(self.time) and self.time >= 0):
            raise ValueError("request time must be finite and >= 0")
        if not (math.isfinite(self.new_ratio) and self.new_ratio > 0):
            raise ValueError("new_ratio must be finite and > 0")


@dataclass(frozen=True)
class MigrationEnergy:
    """Total-lifetime energies of migrating at time t, both directions (nJ)."""

    dram_to_nvm: float
    nvm_to_dram: float
    cost_dram_to_nvm: float
    cost_nvm_to_dram: float


@dataclass(frozen=True)
class MigrationLatency:
    """Lifetime access latency including the copy, both directions (ns)."""

    dram_to_nvm: float
    nvm_to_dram: float
    time_dram_to_nvm: float
    time_nvm_to_dram: float


def migration_times(obj: ObjectProfile, dev: DeviceSpec) -> tuple[float, float]:
    """Block-granular copy times (ns): (DRAM to NVM, NVM to DRAM)."""
    blocks = math.ceil(obj.size / dev.cache_block_size)
    to_nvm = blocks * (dev.dram_read_latency + dev.effective_nvm_write_latency)
    to_dram = blocks * (dev.nvm_read_latency + dev.effective_dram_write_latency)
    return to_nvm, to_dram


def _check_live(obj: ObjectProfile, t: float) -> None:
    if not obj.alloc_time <= t <= obj.dealloc_time:
        raise ValueError(
            f"object {obj.id!r} is not allocated at t={t} "
            f"(lifetime [{obj.alloc_time}, {obj.dealloc_time}])")


def migration_energies(obj: ObjectProfile, dev: DeviceSpec,
                       t: float) -> MigrationEnergy:
    """Energy of migrating at time t versus device-resident phases.

    The elapsed lifetime fraction is charged at the source device's rate
    and the remainder at the destination's; the copy itself reads and
    writes the whole object once and accrues DRAM refresh over the copy
    time.
    """
    _check_live(obj, t)
    de = dram_energy(obj, dev)
    ne = nvm_energy(obj, dev)
    elapsed = (t - obj.alloc_time) / obj.lifetime
    remaining = (obj.dealloc_time - t) / obj.lifetime
    time_dn, time_nd = migration_times(obj, dev)
    copy_traffic = (dev.dram_act_pre + dev.dram_rw
                    + dev.nvm_act_pre + dev.nvm_rba) * obj.size
    cost_dn = copy_traffic + dev.refresh_rate * obj.size * (time_dn / _NS_PER_S)
    cost_nd = copy_traffic + dev.refresh_rate * obj.size * (time_nd / _NS_PER_S)
    return MigrationEnergy(
        dram_to_nvm=de * elapsed + cost_dn + ne * remaining,
        nvm_to_dram=ne * elapsed + cost_nd + de * remaining,
        cost_dram_to_nvm=cost_dn,
        cost_nvm_to_dram=cost_nd,
    )


def migration_latency(obj: ObjectProfile, dev: DeviceSpec,
                      t: float) -> MigrationLatency:
    """LLC-miss latency of a migrated object's lifetime, both directions."""
    _check_live(obj, t)
    elapsed = (t - obj.alloc_time) / obj.lifetime
    remaining = (obj.dealloc_time - t) / obj.lifetime
    time_dn, time_nd = migration_times(obj, dev)
    ld = dev.dram_latency * obj.llc_misses
    ln = dev.nvm_latency * obj.llc_misses
    return MigrationLatency(
        dram_to_nvm=ld * elapsed + time_dn + ln * remaining,
        nvm_to_dram=ln * elapsed + time_nd + ld * remaining,
        time_dram_to_nvm=time_dn,
        time_nvm_to_dram=time_nd,
    )


@dataclass(frozen=True)
class MigrationDecision:
    """Outcome for one live major object."""

    id: str
    current_device: str
    target_device: str
    migrate: bool
    energy_nj: float
    migration_cost_nj: float
    migration_time_ns: float


@dataclass(frozen=True)
class MigrationPlan:
    """Per-object migration decisions plus totals for the live population.

    ``e_total_nj`` and ``objective_ns`` cover live major objects (migration
    candidates); energy already committed by freed objects is reported
    separately and objects allocated after t are covered by the companion
    ``future_plan``. With status infeasible the decisions keep every object
    in place.
    """

    decisions: tuple[MigrationDecision, ...]
    status: str
    time_s: float
    new_ratio: float
    strict: bool
    e_total_nj: float
    requirement_nj: float
    objective_ns: float
    dead_energy_nj: float
    dead_ids: tuple[str, ...]
    future_ids: tuple[str, ...]
    post_placements: dict[str, str]
    future_plan: PlacementPlan | None = None
    binding_constraints: tuple[str, ...] = ()

    @property
    def feasible(self) -> bool:
        return self.status == ilp.STATUS_OPTIMAL

    @property
    def migrated_ids(self) -> tuple[str, ...]:
        return tuple(d.id for d in self.decisions if d.migrate)


def build_migration_program(live: Sequence[ObjectProfile], dev: DeviceSpec,
                            on_dram: Sequence[bool], t: float,
                            requirement: float, dram_free: float,
                            transient_capacity: bool = False
                            ) -> tuple[ilp.ZeroOneProgram, float]:
    """ILP over live major objects; variable 1 means migrate.

    Returns (program, objective offset); the offset is the stay-everywhere
    latency so the program minimizes the latency delta of migrating.
    """
    n = len(live)
    stay_e = np.zeros(n)
    mig_e = np.zeros(n)
    stay_l = np.zeros(n)
    mig_l = np.zeros(n)
    sizes = np.array([o.size for o in live])
    cp = np.array([1.0 if d else 0.0 for d in on_dram])
    for i, obj in enumerate(live):
        energy = migration_energies(obj, dev, t)
        latency = migration_latency(obj, dev, t)
        if on_dram[i]:
            stay_e[i] = dram_energy(obj, dev)
            mig_e[i] = energy.dram_to_nvm
            stay_l[i] = dev.dram_latency * obj.llc_misses
            mig_l[i] = latency.dram_to_nvm
        else:
            stay_e[i] = nvm_energy(obj, dev)
            mig_e[i] = energy.nvm_to_dram
            stay_l[i] = dev.nvm_latency * obj.llc_misses
            mig_l[i] = latency.nvm_to_dram

    objective = mig_l - stay_l
    offset = float(stay_l.sum())
    scale = float(np.max(np.abs(objective))) if n else 0.0
    scaled_objective = objective / scale if scale > 0 else objective

    # Post-migration DRAM residency is cp + x*(1 - 2cp).
    flip = (1.0 - 2.0 * cp) * sizes
    constraints = [
        _normalized(flip, dram_free - float((cp * sizes).sum())),
        _normalized(-flip, dev.nvm_capacity - float(((1.0 - cp) * sizes).sum())),
        _normalized(mig_e - stay_e, requirement - float(stay_e.sum())),
    ]
    if transient_capacity:
        # A migrating object holds space on both devices while copying.
        constraints.append(_normalized((1.0 - cp) * sizes,
                                       dram_free - float((cp * sizes).sum())))
        constraints.append(_normalized(cp * sizes,
                                       dev.nvm_capacity
                                       - float(((1.0 - cp) * sizes).sum())))
    names = tuple(o.id for o in live)
    return ilp.ZeroOneProgram(tuple(scaled_objective), tuple(constraints),
                              names), offset


_MIGRATION_CONSTRAINTS = (CONSTRAINT_CAPACITY_DRAM, CONSTRAINT_CAPACITY_NVM,
                          CONSTRAINT_ENERGY, "transient_dram", "transient_nvm")


def plan_migration(profiles: ProfileSet, dev: DeviceSpec,
                   current: PlacementPlan, request: MigrationRequest,
                   reserved_dram_bytes: float | None = None,
                   transient_capacity: bool = False,
                   allow_migration: bool = True,
                   plan_future: bool = True) -> MigrationPlan:
    """Decide which live major objects to migrate under the new requirement.

    The current plan must assign a device to every major object that is
    live at the request time. ``allow_migration=False`` evaluates the
    stay-everywhere vector instead of optimizing, which is useful as a
    reference point.
    """
    t = request.time
    if reserved_dram_bytes is None:
        reserved_dram_bytes = current.reserved_dram_bytes
    major, minor = filter_major(profiles, current.major_threshold)

    live = [o for o in major if o.live_at(t)]
    dead = [o for o in major if o.dealloc_time <= t]
    future = [o for o in major if o.alloc_time > t]
    for obj in live + dead:
        if obj.id not in current.placements:
            raise ValueError(
                f"current plan does not place object {obj.id!r}")

    live_minor_bytes = sum(o.size for o in minor if o.live_at(t))
    dram_free = dev.dram_capacity - reserved_dram_bytes - live_minor_bytes
    if dram_free < 0:
        raise CapacityError(
            "live minor objects and reservation exceed DRAM capacity")

    on_dram = [current.placements[o.id] == DRAM for o in live]
    stay_e = [dram_energy(o, dev) if d else nvm_energy(o, dev)
              for o, d in zip(live, on_dram)]
    de_live = sum(dram_energy(o, dev) for o in live)
    requirement = request.new_ratio * de_live if request.strict \
        else float(sum(stay_e))

    program, offset = build_migration_program(
        live, dev, on_dram, t, requirement, dram_free,
        transient_capacity=transient_capacity)
    if allow_migration:
        solution = ilp.solve(program)
    else:
        zero = (0,) * len(live)
        if ilp.constraint_violations(program, zero):
            solution = ilp.IlpSolution(zero, 0.0, ilp.STATUS_INFEASIBLE)
        else:
            solution = ilp.IlpSolution(zero, 0.0, ilp.STATUS_OPTIMAL)

    status = solution.status
    binding: tuple[str, ...] = ()
    if status == ilp.STATUS_INFEASIBLE:
        # Hard limit unreachable: keep everything in place.
        migrate = [0] * len(live)
        binding = diagnose_infeasibility(program, _MIGRATION_CONSTRAINTS)
    else:
        migrate = list(solution.assignment)

    decisions = []
    e_total = 0.0
    objective = 0.0
    post: dict[str, str] = {o.id: DRAM for o in minor if o.live_at(t)}
    for obj, here, x in zip(live, on_dram, migrate):
        energy = migration_energies(obj, dev, t)
        latency = migration_latency(obj, dev, t)
        if here:
            mig_e, cost = energy.dram_to_nvm, energy.cost_dram_to_nvm
            mig_l, copy_time = latency.dram_to_nvm, latency.time_dram_to_nvm
            stay = dram_energy(obj, dev)
            stay_lat = dev.dram_latency * obj.llc_misses
            source, dest = DRAM, NVM
        else:
            mig_e, cost = energy.nvm_to_dram, energy.cost_nvm_to_dram
            mig_l, copy_time = latency.nvm_to_dram, latency.time_nvm_to_dram
            stay = nvm_energy(obj, dev)
            stay_lat = dev.nvm_latency * obj.llc_misses
            source, dest = NVM, DRAM
        chosen_e = mig_e if x else stay
        chosen_l = mig_l if x else stay_lat
        e_total += chosen_e
        objective += chosen_l
        target = dest if x else source
        post[obj.id] = target
        decisions.append(MigrationDecision(
            id=obj.id,
            current_device=source,
            target_device=target,
            migrate=bool(x),
            energy_nj=chosen_e,
            migration_cost_nj=cost if x else 0.0,
            migration_time_ns=copy_time if x else 0.0,
        ))

    dead_energy = sum(
        dram_energy(o, dev) if current.placements[o.id] == DRAM
        else nvm_energy(o, dev) for o in dead)

    future_plan = None
    if plan_future and future:
        future_set = ProfileSet(
            tuple(o for o in profiles if o.alloc_time > t),
            profiles.workload_label, profiles.workload_size)
        live_post_dram = sum(o.size for o, x, here in
                             zip(live, migrate, on_dram)
                             if (here and not x) or (not here and x))
        live_post_nvm = sum(o.size for o in live) - live_post_dram
        residual = dev.with_capacities(
            max(0.0, dram_free - live_post_dram),
            max(0.0, dev.nvm_capacity - live_post_nvm))
        try:
            future_plan = plan_static(future_set, residual, request.new_ratio,
                                      current.major_threshold)
        except CapacityError:
            future_plan = None

    return MigrationPlan(
        decisions=tuple(decisions),
        status=status,
        time_s=t,
        new_ratio=request.new_ratio,
        strict=request.strict,
        e_total_nj=e_total,
        requirement_nj=requirement,
        objective_ns=objective,
        dead_energy_nj=dead_energy,
        dead_ids=tuple(o.id for o in dead),
        future_ids=tuple(o.id for o in future),
        post_placements=post,
        future_plan=future_plan,
        binding_constraints=binding,
    )


def write_migration_plan(plan: MigrationPlan,
                         dest: str | os.PathLike | IO[str]) -> None:
    """Serialize the migration table plus its summary block."""
    if hasattr(dest, "write"):
        _write_migration_stream(plan, dest)
        return
    with open(dest, "w", encoding="utf-8", newline="\n") as handle:
        _write_migration_stream(plan, handle)


def _write_migration_stream(plan: MigrationPlan, stream: IO[str]) -> None:
    stream.write(MIGRATION_FORMAT_VERSION + "\n")
    stream.write(f"status={plan.status}\n")
    stream.write(f"time_s={repr(plan.time_s)}\n")
    stream.write(f"new_ratio={repr(plan.new_ratio)}\n")
    stream.write(f"strict={int(plan.strict)}\n")
    stream.write(f"e_total_nj={repr(plan.e_total_nj)}\n")
    stream.write(f"requirement_nj={repr(plan.requirement_nj)}\n")
    stream.write(f"objective_ns={repr(plan.objective_ns)}\n")
    stream.write(f"dead_energy_nj={repr(plan.dead_energy_nj)}\n")
    stream.write(f"dead_ids={';'.join(plan.dead_ids)}\n")
    stream.write(f"future_ids={';'.join(plan.future_ids)}\n")
    stream.write(f"binding={';'.join(plan.binding_constraints)}\n")
    stream.write("id,from,to,migrate,migce_nJ,migct_ns\n")
    for d in plan.decisions:
        stream.write(f"{d.id},{d.current_device},{d.target_device},"
                     f"{int(d.migrate)},{repr(d.migration_cost_nj)},"
                     f"{repr(d.migration_time_ns)}\n")
